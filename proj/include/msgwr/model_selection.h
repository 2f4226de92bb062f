#ifndef MSGWR_MODEL_SELECTION_H
#define MSGWR_MODEL_SELECTION_H

#include <functional>
#include <map>

#include "msgwr/types.h"

namespace msgwr {

// A criterion evaluation. Infeasible candidates (AICc denominator <= 0,
// leverage >= 1, zero residual variance, degenerate neighborhoods) carry
// feasible = false instead of propagating infinities or throwing.
struct CriterionValue {
    double value = 0.0;
    bool feasible = false;
    double trace_S = 0.0;
    double sigma2_hat = 0.0;

    static CriterionValue infeasible() { return {}; }
    // Strict "better than": any feasible value beats an infeasible one.
    bool better_than(const CriterionValue& o) const {
        if (!feasible) return false;
        if (!o.feasible) return true;
        return value < o.value;
    }
};

// Corrected AIC for linear smoothers:
//   n ln(sigma2) + n ln(2 pi) + n (n + trace_S) / (n - 2 - trace_S).
// Throws numeric_error when sigma2_hat <= 0 with a feasible denominator;
// returns infeasible when n - 2 - trace_S <= 0 or sigma2_hat == 0.
CriterionValue aicc(arma::uword n, double sigma2_hat, double trace_S);

// Leverage-corrected leave-one-out score: mean((e_i / (1 - s_ii))^2).
// Infeasible when any s_ii >= 1.
CriterionValue cv_score(const arma::vec& residuals, const arma::vec& leverages);

struct BandwidthSearchResult {
    int bandwidth = 0;
    double criterion = 0.0;
    std::map<int, CriterionValue> evaluated;  // memo of every probe
};

// Golden-section minimization over the integer lattice [k_min, k_max];
// brackets narrow to width <= 3 and the final bracket is scanned
// exhaustively. Evaluations are memoized; ties break toward the larger
// bandwidth (smoother model). Throws calibration_error when every evaluated
// candidate is infeasible.
BandwidthSearchResult golden_section_bandwidth_search(
    const std::function<CriterionValue(int)>& evaluate, int k_min, int k_max);

struct AlphaSearchResult {
    double alpha = 1.0;
    double criterion = 0.0;
    CriterionValue best;
};

// Divide-and-conquer alpha search: coarse grid {0, 0.1, ..., 1.0}, then the
// step halves around the incumbent until step <= epsilon/2. Both endpoints
// are always evaluated; ties break toward larger alpha.
// Throws parameter_error unless 0 < epsilon < 1.
AlphaSearchResult alpha_search_dnc(
    const std::function<CriterionValue(double)>& evaluate,
    double epsilon = 0.005);

// Greedy hill climb from each seed with a fixed step, then one refinement
// pass at step 0.01 around the winner. Endpoints always evaluated; ties
// break toward larger alpha. Throws parameter_error on an empty seed list,
// seeds outside [0,1], or step <= 0.
AlphaSearchResult alpha_search_greedy(
    const std::function<CriterionValue(double)>& evaluate,
    const std::vector<double>& seeds = {0.0, 0.25, 0.5, 0.75, 1.0},
    double step = 0.05);

} // namespace msgwr

#endif
