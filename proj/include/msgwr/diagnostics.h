#ifndef MSGWR_DIAGNOSTICS_H
#define MSGWR_DIAGNOSTICS_H

#include "msgwr/types.h"

namespace msgwr {

// Goodness-of-fit bundle; adjusted R^2 uses the effective number of
// parameters as the complexity count. Throws input_error when the total sum
// of squares is zero or n <= enp_model + 1.
MetricBundle fit_metrics(const arma::vec& y, const arma::vec& fitted,
                         double enp_model);

// Global Moran's I of residuals under row-standardized binary k-nearest-
// neighbor weights (ties at the k-th distance all included). Mean-centers
// internally; z and two-sided p come from the normality approximation.
// Optionally adds a seeded permutation p-value (n_permutations draws).
// Throws input_error when n < 3 or the residuals are constant.
MoranResult morans_i(const arma::vec& residuals, const arma::mat& coords,
                     int k = 8, bool permutation = false,
                     int n_permutations = 999, std::uint64_t seed = 0);

} // namespace msgwr

#endif
