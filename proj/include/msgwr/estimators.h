#ifndef MSGWR_ESTIMATORS_H
#define MSGWR_ESTIMATORS_H

#include "msgwr/types.h"

namespace msgwr {

// Global least squares baseline; coefficients replicated across rows,
// classical standard errors.
FitResult fit_ols(const Dataset& data);

// One shared bandwidth, geographic weighting only (alpha = 1). Bandwidth
// selected by golden section on the chosen criterion.
FitResult fit_gwr(const Dataset& data, const FitOptions& opts = {});

// One shared bandwidth plus one shared alpha blending the geographic kernel
// with pooled attribute similarity (per-covariate standardized differences
// averaged across non-intercept covariates). For each candidate bandwidth
// the alpha search runs; the best (bandwidth, alpha) pair wins.
FitResult fit_sgwr(const Dataset& data, const FitOptions& opts = {});

// Backfitting calibration with one (bandwidth, alpha) pair per covariate.
// mode = MGWR pins every alpha to 1 (initialization from GWR); mode = MSGWR
// searches alpha per covariate (initialization from SGWR). Pins in
// opts.pins freeze individual bandwidths/alphas. When every bandwidth is
// pinned to one shared value and every alpha to one shared value, the
// model collapses to the corresponding single-scale fit (the documented
// GWR/SGWR reductions) and is computed directly.
FitResult fit_msgwr(const Dataset& data, const FitOptions& opts = {});

} // namespace msgwr

#endif
