#include "msgwr/diagnostics.h"

#include <cmath>
#include <random>

#include "msgwr/errors.h"
#include "msgwr/geometry.h"

namespace msgwr {

MetricBundle fit_metrics(const arma::vec& y, const arma::vec& fitted,
                         double enp_model)
{
    const double n = static_cast<double>(y.n_elem);
    if (y.n_elem != fitted.n_elem)
        throw input_error("fit_metrics: length mismatch");
    if (n <= enp_model + 1.0)
        throw input_error("fit_metrics: effective parameters exhaust the sample");

    const arma::vec e = y - fitted;
    const double rss = arma::dot(e, e);
    const double tss = arma::accu(arma::square(y - arma::mean(y)));
    if (tss == 0.0)
        throw input_error("fit_metrics: constant response, R^2 undefined");

    MetricBundle mb;
    mb.rss = rss;
    const double r2 = 1.0 - rss / tss;
    mb.adj_r2 = 1.0 - (1.0 - r2) * (n - 1.0) / (n - enp_model - 1.0);
    mb.mae = arma::mean(arma::abs(e));
    mb.rmse = std::sqrt(rss / n);
    // AICc is attached by the caller, which knows trace(S).
    return mb;
}

MoranResult morans_i(const arma::vec& residuals, const arma::mat& coords,
                     int k, bool permutation, int n_permutations,
                     std::uint64_t seed)
{
    const arma::uword n = residuals.n_elem;
    if (n < 3)
        throw input_error("morans_i needs n >= 3");
    arma::vec e = residuals - arma::mean(residuals);
    const double ss = arma::dot(e, e);
    if (ss == 0.0)
        throw input_error("morans_i: constant residuals");
    if (k < 1 || static_cast<arma::uword>(k) > n - 1)
        throw parameter_error("morans_i: neighbor count out of range");

    // Row-standardized binary k-NN weights; ties at the k-th distance all
    // count as neighbors.
    const arma::mat d = pairwise_distances(coords);
    arma::mat W(n, n, arma::fill::zeros);
    for (arma::uword i = 0; i < n; ++i) {
        const arma::vec row = d.col(i);  // symmetric table
        const arma::vec sorted = arma::sort(row);
        const double kth = sorted(std::min<arma::uword>(k, n - 1));  // 0 = self
        std::vector<arma::uword> idx;
        for (arma::uword l = 0; l < n; ++l)
            if (l != i && row(l) <= kth) idx.push_back(l);
        const double wv = 1.0 / static_cast<double>(idx.size());
        for (arma::uword l : idx) W(i, l) = wv;
    }

    const double S0 = arma::accu(W);
    const double num = arma::as_scalar(e.t() * W * e);
    const double I = (static_cast<double>(n) / S0) * (num / ss);

    MoranResult mr;
    mr.I = I;
    mr.expected = -1.0 / (static_cast<double>(n) - 1.0);

    // Normality-approximation variance (Cliff & Ord moments).
    const double nn = static_cast<double>(n);
    const arma::mat Wsym = W + W.t();
    const double S1 = 0.5 * arma::accu(arma::square(Wsym));
    const arma::vec rsum = arma::sum(W, 1);
    const arma::vec csum = arma::sum(W, 0).t();
    const double S2 = arma::accu(arma::square(rsum + csum));
    const double varI = (nn * nn * S1 - nn * S2 + 3.0 * S0 * S0) /
                            ((nn * nn - 1.0) * S0 * S0) -
                        mr.expected * mr.expected;
    mr.z = (I - mr.expected) / std::sqrt(varI);
    mr.p_value = std::erfc(std::abs(mr.z) / std::sqrt(2.0));

    if (permutation) {
        std::mt19937_64 rng(seed);
        arma::vec perm = e;
        int at_least = 1;  // the observed statistic counts as one draw
        for (int t = 0; t < n_permutations; ++t) {
            // Fisher-Yates on a copy, driven by the seeded engine.
            for (arma::uword j = n - 1; j > 0; --j) {
                std::uniform_int_distribution<arma::uword> pick(0, j);
                std::swap(perm(j), perm(pick(rng)));
            }
            const double Ip = (nn / S0) *
                              (arma::as_scalar(perm.t() * W * perm) / ss);
            if (std::abs(Ip - mr.expected) >= std::abs(I - mr.expected))
                ++at_least;
        }
        mr.p_permutation = static_cast<double>(at_least) /
                           static_cast<double>(n_permutations + 1);
    }
    return mr;
}

} // namespace msgwr
