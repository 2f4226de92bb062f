#ifndef MSGWR_SIMULATION_H
#define MSGWR_SIMULATION_H

#include <optional>

#include "msgwr/types.h"

namespace msgwr {

struct SimulatedDataset {
    Dataset dataset;
    arma::mat true_beta;        // n x m
    arma::mat g_fields;         // n x m smooth geographic component per coefficient
    arma::mat c_fields;         // n x m contextual component (zero where absent)
    std::uint64_t seed = 0;
    std::string scenario;       // "pure_geo" | "mixed"
    int grid_side = 30;
};

struct RecoveryScore {
    arma::vec rmse;                            // m
    std::vector<std::optional<double>> pearson; // absent for constant columns
};

// Unit-square grid scenario whose coefficient surfaces depend on location
// only: b0 = 1 + 0.8 g0, b1 = 1 + g1 (seeded smooth bump fields), and
// b2 = 1 + (u + (2 + v)). Predictors are weakly spatially correlated noise,
// response noise is N(0, 0.9^2). grid_side >= 5.
SimulatedDataset gen_pure_geographic(std::uint64_t seed, int grid_side = 30,
                                     double noise_sd = 0.9);

// Five-coefficient scenario: intercept and b1 purely geographic; b2..b4 mix
// a smooth field with a fragmented contextual regime score (seeded k-means
// on auxiliary random features), b_j = 1 + s_j (g_j + c_j). Predictors for
// j >= 2 carry the contextual score so attribute similarity is informative.
SimulatedDataset gen_mixed_effects(std::uint64_t seed, int grid_side = 30,
                                   double noise_sd = 0.9,
                                   const std::vector<double>& s = {});

// Per-column RMSE and Pearson correlation between coefficient surfaces.
// Pearson is absent (not 0) whenever either column is constant.
RecoveryScore score_recovery(const arma::mat& true_beta,
                             const arma::mat& estimated_beta);

} // namespace msgwr

#endif
