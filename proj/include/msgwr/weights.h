#ifndef MSGWR_WEIGHTS_H
#define MSGWR_WEIGHTS_H

#include <armadillo>

namespace msgwr {

// Adaptive bi-square kernel: w = (1 - (d/radius)^2)^2 for d < radius, else 0.
// The regression point itself (d = 0) gets weight 1; points at exactly the
// radius get 0. Throws parameter_error when radius <= 0.
arma::vec geographic_weights(const arma::vec& d_row, double radius);

// Attribute-similarity weights for covariate values x on the geographic
// neighborhood of point i: w[l] = 0.5^(((x[l]-x[i])/sd)^2) for l in the
// neighborhood, 0 elsewhere. sd is the population standard deviation of x
// over the neighborhood (i included); sd = 0 falls back to rho, which makes
// constant columns weigh every neighbor at 1.
// Throws calibration_error on an empty neighborhood.
arma::vec attribute_weights(const arma::vec& x, arma::uword i,
                            const arma::uvec& neighborhood, double rho = 1e-5);

// Convex combination alpha*w_geo + (1-alpha)*w_attr. The endpoints return
// the corresponding input verbatim so pinned-alpha reductions are exact.
// Throws parameter_error when alpha is outside [0,1].
arma::vec combine_weights(const arma::vec& w_geo, const arma::vec& w_attr,
                          double alpha);

} // namespace msgwr

#endif
