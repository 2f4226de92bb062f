#include "msgwr/model_selection.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "msgwr/errors.h"

namespace msgwr {

CriterionValue aicc(arma::uword n, double sigma2_hat, double trace_S)
{
    const double nn = static_cast<double>(n);
    CriterionValue out;
    out.trace_S = trace_S;
    out.sigma2_hat = sigma2_hat;
    if (sigma2_hat < 0.0)
        throw numeric_error("negative residual variance in AICc");
    if (nn - 2.0 - trace_S <= 0.0 || sigma2_hat == 0.0)
        return CriterionValue::infeasible();
    out.value = nn * std::log(sigma2_hat) + nn * std::log(2.0 * arma::datum::pi) +
                nn * (nn + trace_S) / (nn - 2.0 - trace_S);
    out.feasible = true;
    return out;
}

CriterionValue cv_score(const arma::vec& residuals, const arma::vec& leverages)
{
    CriterionValue out;
    out.trace_S = arma::accu(leverages);
    if (arma::any(leverages >= 1.0))
        return CriterionValue::infeasible();
    const arma::vec loo = residuals / (1.0 - leverages);
    out.value = arma::dot(loo, loo) / static_cast<double>(residuals.n_elem);
    out.feasible = true;
    return out;
}

namespace {

// Memoized probe; infeasible candidates sort above everything feasible.
struct Memo {
    const std::function<CriterionValue(int)>& f;
    std::map<int, CriterionValue>& table;

    const CriterionValue& operator()(int k)
    {
        auto it = table.find(k);
        if (it == table.end()) it = table.emplace(k, f(k)).first;
        return it->second;
    }
    double value(int k)
    {
        const CriterionValue& c = (*this)(k);
        return c.feasible ? c.value : arma::datum::inf;
    }
};

} // namespace

BandwidthSearchResult golden_section_bandwidth_search(
    const std::function<CriterionValue(int)>& evaluate, int k_min, int k_max)
{
    if (k_min > k_max)
        throw parameter_error("bandwidth search bounds empty");
    BandwidthSearchResult res;
    Memo memo{evaluate, res.evaluated};

    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    int lo = k_min, hi = k_max;
    while (hi - lo > 3) {
        const double width = static_cast<double>(hi - lo);
        int x1 = static_cast<int>(std::lround(hi - ratio * width));
        int x2 = static_cast<int>(std::lround(lo + ratio * width));
        x1 = std::clamp(x1, lo + 1, hi - 2);
        x2 = std::clamp(x2, x1 + 1, hi - 1);
        // Ties keep the right-hand bracket: larger bandwidths survive.
        if (memo.value(x1) < memo.value(x2))
            hi = x2;
        else
            lo = x1;
    }
    for (int k = lo; k <= hi; ++k)
        memo(k);

    bool found = false;
    double best = arma::datum::inf;
    for (const auto& [k, c] : res.evaluated) {  // ascending k: ties pick larger
        if (!c.feasible) continue;
        if (!found || c.value <= best) {
            found = true;
            best = c.value;
            res.bandwidth = k;
            res.criterion = c.value;
        }
    }
    if (!found)
        throw calibration_error("no feasible bandwidth in [" + std::to_string(k_min) +
                                ", " + std::to_string(k_max) + "]");
    return res;
}

namespace {

struct AlphaMemo {
    const std::function<CriterionValue(double)>& f;
    std::map<double, CriterionValue> table;

    const CriterionValue& operator()(double a)
    {
        auto it = table.find(a);
        if (it == table.end()) it = table.emplace(a, f(a)).first;
        return it->second;
    }
    double value(double a)
    {
        const CriterionValue& c = (*this)(a);
        return c.feasible ? c.value : arma::datum::inf;
    }
};

AlphaSearchResult finish_alpha(AlphaMemo& memo, double best_alpha)
{
    const CriterionValue& c = memo(best_alpha);
    if (!c.feasible)
        throw calibration_error("no feasible alpha in [0,1]");
    return {best_alpha, c.value, c};
}

// Pick the better of incumbent and candidate; ties go to the larger alpha.
void consider(AlphaMemo& memo, double cand, double& best)
{
    const double vc = memo.value(cand);
    const double vb = memo.value(best);
    if (vc < vb || (vc == vb && cand > best)) best = cand;
}

} // namespace

AlphaSearchResult alpha_search_dnc(
    const std::function<CriterionValue(double)>& evaluate, double epsilon)
{
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw parameter_error("dnc epsilon must lie in (0,1)");
    AlphaMemo memo{evaluate};

    double best = 0.0;
    for (int i = 0; i <= 10; ++i)                 // endpoints 0 and 1 included
        consider(memo, static_cast<double>(i) / 10.0, best);

    double step = 0.1;
    while (step > 0.5 * epsilon) {
        step *= 0.5;
        consider(memo, std::min(1.0, best + step), best);
        consider(memo, std::max(0.0, best - step), best);
    }
    return finish_alpha(memo, best);
}

AlphaSearchResult alpha_search_greedy(
    const std::function<CriterionValue(double)>& evaluate,
    const std::vector<double>& seeds, double step)
{
    if (seeds.empty())
        throw parameter_error("greedy alpha search needs at least one seed");
    if (!(step > 0.0))
        throw parameter_error("greedy step must be positive");
    for (double s : seeds)
        if (!(s >= 0.0 && s <= 1.0))
            throw parameter_error("greedy seed outside [0,1]");
    AlphaMemo memo{evaluate};

    memo(0.0);                                    // endpoints always evaluated
    memo(1.0);
    double best = 1.0;
    consider(memo, 0.0, best);

    for (double seed : seeds) {
        double cur = seed;
        for (;;) {
            const double up = std::min(1.0, cur + step);
            const double dn = std::max(0.0, cur - step);
            double next = cur;
            if (memo.value(up) < memo.value(next)) next = up;
            if (memo.value(dn) < memo.value(next)) next = dn;
            if (next == cur) break;
            cur = next;
        }
        consider(memo, cur, best);
    }
    // One refinement pass at 0.01 resolution around the winner.
    const int center = static_cast<int>(std::lround(best * 100.0));
    for (int j = center - 5; j <= center + 5; ++j) {
        if (j < 0 || j > 100) continue;
        consider(memo, static_cast<double>(j) / 100.0, best);
    }
    return finish_alpha(memo, best);
}

} // namespace msgwr
