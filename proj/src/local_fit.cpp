#include "msgwr/local_fit.h"

#include <string>

#include "msgwr/errors.h"

namespace msgwr {

LocalFitRow weighted_least_squares(const arma::mat& X, const arma::vec& y,
                                   const arma::vec& w, arma::uword i,
                                   bool ridge_fallback)
{
    const arma::uword m = X.n_cols;
    // X'WX and X'W assembled from the weighted design; W is diagonal.
    arma::mat Xw = X.each_col() % w;              // rows scaled by weights
    arma::mat XtWX = X.t() * Xw;                  // m x m
    if (arma::rcond(XtWX) < 1e-12) {
        if (!ridge_fallback)
            throw numeric_error("singular local system at point " + std::to_string(i));
        XtWX.diag() += 1e-8 * arma::trace(XtWX) / static_cast<double>(m);
    }
    arma::mat XtW = Xw.t();                       // m x n
    arma::vec beta = arma::solve(XtWX, XtW * y, arma::solve_opts::likely_sympd);
    // hat_row = x_i' (X'WX)^-1 X'W
    arma::vec mi = arma::solve(XtWX, X.row(i).t(), arma::solve_opts::likely_sympd);
    arma::rowvec hat_row = mi.t() * XtW;

    LocalFitRow out;
    out.beta = std::move(beta);
    out.leverage = hat_row(i);
    out.hat_row = std::move(hat_row);
    return out;
}

arma::rowvec smoothing_operator_row(const arma::vec& x, const arma::vec& w,
                                    arma::uword i)
{
    const double sxx = arma::dot(w, x % x);
    if (sxx == 0.0)
        throw numeric_error("zero weighted self inner product at point " +
                            std::to_string(i));
    return (x(i) / sxx) * (w % x).t();
}

} // namespace msgwr
