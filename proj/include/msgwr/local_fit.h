#ifndef MSGWR_LOCAL_FIT_H
#define MSGWR_LOCAL_FIT_H

#include <armadillo>

namespace msgwr {

struct LocalFitRow {
    arma::vec beta;        // m coefficients at the regression point
    arma::rowvec hat_row;  // n-row of the smoother mapping y to fitted_i
    double leverage;       // its i-th entry, s_ii
};

// Weighted least squares at regression point i: beta solves
// (X'WX) beta = X'Wy, hat_row = x_i' (X'WX)^-1 X'W. The reciprocal condition
// of X'WX below 1e-12 raises numeric_error naming the point, unless
// ridge_fallback adds 1e-8 * tr(X'WX)/m to the diagonal.
LocalFitRow weighted_least_squares(const arma::mat& X, const arma::vec& y,
                                   const arma::vec& w, arma::uword i,
                                   bool ridge_fallback = false);

// Single-covariate smoother row: x_i * (sum_l w_l x_l^2)^-1 * (w .* x)'.
// Maps a working response to covariate j's fitted contribution at i.
// Throws numeric_error when the weighted self inner product vanishes.
arma::rowvec smoothing_operator_row(const arma::vec& x, const arma::vec& w,
                                    arma::uword i);

} // namespace msgwr

#endif
