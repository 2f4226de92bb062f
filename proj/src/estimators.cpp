#include "msgwr/estimators.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "msgwr/diagnostics.h"
#include "msgwr/errors.h"
#include "msgwr/geometry.h"
#include "msgwr/local_fit.h"
#include "msgwr/model_selection.h"
#include "msgwr/weights.h"

namespace msgwr {

namespace {

void validate_design(const Dataset& data)
{
    if (data.y.n_elem != data.X.n_rows)
        throw input_error("design and response lengths differ");
    if (data.y.n_elem < 2)
        throw input_error("need at least two observations");
    if (!data.X.is_finite() || !data.y.is_finite())
        throw input_error("non-finite values in the dataset");
    if (arma::rank(data.X) < data.X.n_cols)
        throw input_error("design matrix is rank deficient");
}

void set_threads(int threads)
{
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

// ------------------------------------------------------------------
// Shared engine state: distance tables, search bounds, criterion glue.
// ------------------------------------------------------------------
struct Engine {
    const Dataset& data;
    const FitOptions& opts;
    arma::uword n;
    arma::uword m;
    arma::mat D;       // n x n distances
    arma::mat Ds;      // column i = sorted distances from point i
    int k_min;
    int k_max;

    Engine(const Dataset& d, const FitOptions& o)
        : data(d), opts(o), n(d.n()), m(d.m())
    {
        D = pairwise_distances(d.coords);
        Ds.set_size(n, n);
        for (arma::uword i = 0; i < n; ++i)
            Ds.col(i) = arma::sort(D.col(i));
        k_min = static_cast<int>(m) + 2;
        k_max = static_cast<int>(n);
        if (k_min > k_max)
            throw input_error("too few observations for the bandwidth search");
    }

    double radius(arma::uword i, int k) const
    {
        const arma::uword idx = std::min<arma::uword>(k, n - 1);
        return Ds(idx, i);
    }

    arma::vec geo_row(arma::uword i, int k) const
    {
        return geographic_weights(D.col(i), radius(i, k));
    }

    static arma::uvec support(const arma::vec& w) { return arma::find(w > 0.0); }

    CriterionValue criterion(const arma::vec& resid, const arma::vec& lev) const
    {
        const double trS = arma::accu(lev);
        if (opts.criterion == Criterion::CV) {
            CriterionValue c = cv_score(resid, lev);
            c.trace_S = trS;
            return c;
        }
        const double rss = arma::dot(resid, resid);
        return aicc(n, rss / static_cast<double>(n), trS);
    }

    AlphaSearchResult search_alpha(
        const std::function<CriterionValue(double)>& f) const
    {
        if (opts.alpha_search == AlphaSearchKind::Greedy)
            return alpha_search_greedy(f, opts.greedy_seeds, opts.greedy_step);
        return alpha_search_dnc(f, opts.dnc_epsilon);
    }
};

// ------------------------------------------------------------------
// Pooled attribute similarity (single-alpha model): per-covariate
// standardized absolute differences averaged over non-intercept
// covariates, through the same half-power curve.
// ------------------------------------------------------------------
arma::vec pooled_attribute_weights(const arma::mat& X, arma::uword i,
                                   const arma::uvec& nb, double rho)
{
    const arma::uword m = X.n_cols;
    arma::vec dist(X.n_rows, arma::fill::zeros);
    arma::uword used = 0;
    for (arma::uword j = 1; j < m; ++j) {
        double s1 = 0.0, s2 = 0.0;
        for (arma::uword idx : nb) {
            s1 += X(idx, j);
            s2 += X(idx, j) * X(idx, j);
        }
        const double cnt = static_cast<double>(nb.n_elem);
        const double mean = s1 / cnt;
        double var = s2 / cnt - mean * mean;
        if (var < 0.0) var = 0.0;
        double sd = std::sqrt(var);
        if (sd == 0.0) sd = rho;
        for (arma::uword idx : nb)
            dist(idx) += std::abs(X(idx, j) - X(i, j)) / sd;
        ++used;
    }
    const double log_half = std::log(0.5);
    arma::vec w(X.n_rows, arma::fill::zeros);
    for (arma::uword idx : nb) {
        const double z = used > 0 ? dist(idx) / static_cast<double>(used) : 0.0;
        w(idx) = std::exp(log_half * z * z);
    }
    return w;
}

// ------------------------------------------------------------------
// Direct single-scale fits (OLS / GWR / SGWR and the collapsed
// multiscale configurations). The per-covariate projection rows are
// [R_j]_i = x_ij * M_i(j,:) with M_i = (X'WX)^-1 X'W, so sum_j R_j
// equals the hat matrix exactly and every model shares one inference
// routine.
// ------------------------------------------------------------------
struct DirectFit {
    arma::mat beta;               // n x m
    arma::vec fitted;
    arma::vec resid;
    arma::mat S;                  // n x n hat matrix
    std::vector<arma::mat> R;     // m matrices, n x n
    bool have_R = false;
};

// Criterion-only evaluation: residuals and leverages, no hat rows.
struct DirectProbe {
    arma::vec resid;
    arma::vec lev;
    bool ok = false;
};

// Weight row for the shared single-scale model at (k, alpha).
arma::vec shared_weight_row(const Engine& eng, arma::uword i, int k, double alpha)
{
    const double r = eng.radius(i, k);
    if (!(r > 0.0)) throw calibration_error("degenerate neighborhood");
    arma::vec wg = geographic_weights(eng.D.col(i), r);
    if (alpha == 1.0) return wg;
    const arma::uvec nb = Engine::support(wg);
    const arma::vec wa = pooled_attribute_weights(eng.data.X, i, nb, eng.opts.rho);
    return combine_weights(wg, wa, alpha);
}

DirectProbe direct_probe(const Engine& eng, int k, double alpha)
{
    const arma::uword n = eng.n;
    DirectProbe p;
    p.resid.set_size(n);
    p.lev.set_size(n);
    bool ok = true;

#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const arma::uword i = static_cast<arma::uword>(ii);
        if (!ok) continue;
        try {
            const arma::vec w = shared_weight_row(eng, i, k, alpha);
            const arma::mat Xw = eng.data.X.each_col() % w;
            arma::mat XtWX = eng.data.X.t() * Xw;
            if (arma::rcond(XtWX) < 1e-12) {
                if (!eng.opts.ridge_fallback) throw numeric_error("singular");
                XtWX.diag() += 1e-8 * arma::trace(XtWX) / static_cast<double>(eng.m);
            }
            const arma::vec xi = eng.data.X.row(i).t();
            const arma::vec rhs = Xw.t() * eng.data.y;
            const arma::vec beta = arma::solve(XtWX, rhs, arma::solve_opts::likely_sympd);
            const arma::vec mi = arma::solve(XtWX, xi, arma::solve_opts::likely_sympd);
            p.resid(i) = eng.data.y(i) - arma::dot(xi, beta);
            p.lev(i) = arma::dot(mi, xi) * w(i);
        } catch (const std::runtime_error&) {
            ok = false;
        }
    }
    p.ok = ok;
    return p;
}

DirectFit direct_fit(const Engine& eng, int k, double alpha, bool build_R)
{
    const arma::uword n = eng.n;
    const arma::uword m = eng.m;
    DirectFit f;
    f.beta.set_size(n, m);
    f.fitted.set_size(n);
    f.S.set_size(n, n);
    if (build_R) {
        f.R.assign(m, arma::mat(n, n));
        f.have_R = true;
    }
    std::string failure;

#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const arma::uword i = static_cast<arma::uword>(ii);
        try {
            const arma::vec w = shared_weight_row(eng, i, k, alpha);
            const arma::mat Xw = eng.data.X.each_col() % w;
            arma::mat XtWX = eng.data.X.t() * Xw;
            if (arma::rcond(XtWX) < 1e-12) {
                if (!eng.opts.ridge_fallback)
                    throw numeric_error("singular local system at point " +
                                        std::to_string(i));
                XtWX.diag() += 1e-8 * arma::trace(XtWX) / static_cast<double>(m);
            }
            // M_i = (X'WX)^-1 X'W: row j scaled by x_ij gives R_j's row i.
            const arma::mat Mi =
                arma::solve(XtWX, Xw.t(), arma::solve_opts::likely_sympd);
            const arma::vec beta_i = Mi * eng.data.y;
            f.beta.row(i) = beta_i.t();
            f.fitted(i) = arma::dot(eng.data.X.row(i), beta_i);
            f.S.row(i) = eng.data.X.row(i) * Mi;
            if (build_R)
                for (arma::uword j = 0; j < m; ++j)
                    f.R[j].row(i) = eng.data.X(i, j) * Mi.row(j);
        } catch (const std::runtime_error& e) {
#pragma omp critical
            if (failure.empty()) failure = e.what();
        }
    }
    if (!failure.empty()) throw numeric_error(failure);
    f.resid = eng.data.y - f.fitted;
    return f;
}

// ------------------------------------------------------------------
// Inference shared by every model: ENP_j = tr(R_j), sigma^2 from the
// residuals, per-point variance propagated through R_j rows.
// ------------------------------------------------------------------
void attach_inference(FitResult& out, const Dataset& data,
                      const std::vector<arma::mat>& R)
{
    const arma::uword n = data.n();
    const arma::uword m = data.m();
    out.enp_per_covariate.set_size(m);
    double trS = 0.0;
    for (arma::uword j = 0; j < m; ++j) {
        out.enp_per_covariate(j) = arma::trace(R[j]);
        trS += out.enp_per_covariate(j);
    }
    out.enp_model = trS;

    const double rss = arma::dot(out.residuals, out.residuals);
    const double denom = static_cast<double>(n) - trS;
    if (denom <= 0.0)
        throw calibration_error("effective parameters exceed observations");
    out.sigma2_hat = rss / denom;

    out.se.set_size(n, m);
    out.t_values.set_size(n, m);
    for (arma::uword j = 0; j < m; ++j) {
        const arma::vec row_ss = arma::sum(arma::square(R[j]), 1);
        for (arma::uword i = 0; i < n; ++i) {
            const double xij = data.X(i, j);
            if (xij == 0.0) {
                out.se(i, j) = arma::datum::nan;
                out.t_values(i, j) = arma::datum::nan;
                continue;
            }
            const double var = out.sigma2_hat * row_ss(i) / (xij * xij);
            out.se(i, j) = std::sqrt(var);
            out.t_values(i, j) = out.beta(i, j) / out.se(i, j);
        }
    }

    out.diagnostics = fit_metrics(data.y, out.fitted, trS);
    const CriterionValue a = aicc(n, rss / static_cast<double>(n), trS);
    out.diagnostics.aicc = a.feasible ? a.value : arma::datum::nan;
}

FitResult assemble_direct(const Engine& eng, const std::string& model,
                          int k, double alpha, SearchTrace trace,
                          double criterion_value)
{
    DirectFit f = direct_fit(eng, k, alpha, true);
    FitResult out;
    out.model = model;
    out.beta = std::move(f.beta);
    out.fitted = std::move(f.fitted);
    out.residuals = std::move(f.resid);
    out.scales.bandwidth.assign(eng.m, k);
    out.scales.alpha.assign(eng.m, alpha);
    out.trace = std::move(trace);
    out.criterion = eng.opts.criterion == Criterion::CV ? "cv" : "aicc";
    out.criterion_value = criterion_value;
    attach_inference(out, eng.data, f.R);
    return out;
}

} // namespace

// ------------------------------------------------------------------
// OLS
// ------------------------------------------------------------------
FitResult fit_ols(const Dataset& data)
{
    validate_design(data);
    const arma::uword n = data.n();
    const arma::uword m = data.m();

    arma::mat XtX = data.X.t() * data.X;
    if (arma::rcond(XtX) < 1e-12)
        throw input_error("rank-deficient design in least squares");
    const arma::mat M = arma::solve(XtX, data.X.t(), arma::solve_opts::likely_sympd);
    const arma::vec beta = M * data.y;

    FitResult out;
    out.model = "ols";
    out.beta = arma::repmat(beta.t(), n, 1);
    out.fitted = data.X * beta;
    out.residuals = data.y - out.fitted;
    out.scales.bandwidth.assign(m, static_cast<int>(n));
    out.scales.alpha.assign(m, 1.0);
    out.criterion = "aicc";

    std::vector<arma::mat> R(m);
    for (arma::uword j = 0; j < m; ++j)
        R[j] = data.X.col(j) * M.row(j);
    attach_inference(out, data, R);
    out.criterion_value = out.diagnostics.aicc;
    return out;
}

// ------------------------------------------------------------------
// GWR: one bandwidth, geographic kernel only.
// ------------------------------------------------------------------
FitResult fit_gwr(const Dataset& data, const FitOptions& opts)
{
    validate_design(data);
    set_threads(opts.threads);
    Engine eng(data, opts);

    SearchTrace trace;
    int step = 0;
    auto evaluate = [&](int k) -> CriterionValue {
        const DirectProbe p = direct_probe(eng, k, 1.0);
        const CriterionValue c = p.ok ? eng.criterion(p.resid, p.lev)
                                      : CriterionValue::infeasible();
        trace.push_back({-1, k, 1.0,
                         c.feasible ? c.value : arma::datum::nan, ++step});
        return c;
    };
    const BandwidthSearchResult sel =
        golden_section_bandwidth_search(evaluate, eng.k_min, eng.k_max);
    return assemble_direct(eng, "gwr", sel.bandwidth, 1.0, std::move(trace),
                           sel.criterion);
}

// ------------------------------------------------------------------
// SGWR: one bandwidth plus one shared alpha on pooled similarity.
// For every candidate bandwidth the blended cross-products are stacked
// once, so each alpha candidate costs one small solve per point.
// ------------------------------------------------------------------
namespace {

struct SgwrStacks {
    arma::cube G;   // m x m x n  geographic cross-products
    arma::cube A;   // m x m x n  attribute cross-products
    arma::mat bg;   // m x n
    arma::mat ba;   // m x n
    bool ok = false;
};

SgwrStacks sgwr_stacks(const Engine& eng, int k)
{
    const arma::uword n = eng.n;
    const arma::uword m = eng.m;
    SgwrStacks st;
    st.G.set_size(m, m, n);
    st.A.set_size(m, m, n);
    st.bg.set_size(m, n);
    st.ba.set_size(m, n);
    bool ok = true;

#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const arma::uword i = static_cast<arma::uword>(ii);
        if (!ok) continue;
        const double r = eng.radius(i, k);
        if (!(r > 0.0)) {
            ok = false;
            continue;
        }
        const arma::vec wg = geographic_weights(eng.D.col(i), r);
        const arma::uvec nb = Engine::support(wg);
        if (nb.n_elem < m) {
            ok = false;
            continue;
        }
        const arma::vec wa = pooled_attribute_weights(eng.data.X, i, nb, eng.opts.rho);
        const arma::mat Xg = eng.data.X.each_col() % wg;
        const arma::mat Xa = eng.data.X.each_col() % wa;
        st.G.slice(i) = eng.data.X.t() * Xg;
        st.A.slice(i) = eng.data.X.t() * Xa;
        st.bg.col(i) = Xg.t() * eng.data.y;
        st.ba.col(i) = Xa.t() * eng.data.y;
    }
    st.ok = ok;
    return st;
}

CriterionValue sgwr_alpha_criterion(const Engine& eng, const SgwrStacks& st,
                                    double alpha)
{
    const arma::uword n = eng.n;
    arma::vec resid(n), lev(n);
    bool ok = true;

#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const arma::uword i = static_cast<arma::uword>(ii);
        if (!ok) continue;
        try {
            arma::mat XtWX;
            arma::vec rhs;
            if (alpha == 1.0) {
                XtWX = st.G.slice(i);
                rhs = st.bg.col(i);
            } else if (alpha == 0.0) {
                XtWX = st.A.slice(i);
                rhs = st.ba.col(i);
            } else {
                XtWX = alpha * st.G.slice(i) + (1.0 - alpha) * st.A.slice(i);
                rhs = alpha * st.bg.col(i) + (1.0 - alpha) * st.ba.col(i);
            }
            if (arma::rcond(XtWX) < 1e-12) {
                ok = false;
                continue;
            }
            const arma::vec xi = eng.data.X.row(i).t();
            const arma::vec beta =
                arma::solve(XtWX, rhs, arma::solve_opts::likely_sympd);
            const arma::vec mi =
                arma::solve(XtWX, xi, arma::solve_opts::likely_sympd);
            resid(i) = eng.data.y(i) - arma::dot(xi, beta);
            lev(i) = arma::dot(mi, xi);  // self weight is 1 for every alpha
        } catch (const std::runtime_error&) {
            ok = false;
        }
    }
    if (!ok) return CriterionValue::infeasible();
    return eng.criterion(resid, lev);
}

} // namespace

FitResult fit_sgwr(const Dataset& data, const FitOptions& opts)
{
    validate_design(data);
    set_threads(opts.threads);
    Engine eng(data, opts);

    SearchTrace trace;
    int step = 0;
    std::map<int, double> best_alpha;
    auto evaluate = [&](int k) -> CriterionValue {
        const SgwrStacks st = sgwr_stacks(eng, k);
        if (!st.ok) {
            trace.push_back({-1, k, arma::datum::nan, arma::datum::nan, ++step});
            return CriterionValue::infeasible();
        }
        try {
            const AlphaSearchResult ar = eng.search_alpha(
                [&](double a) { return sgwr_alpha_criterion(eng, st, a); });
            best_alpha[k] = ar.alpha;
            trace.push_back({-1, k, ar.alpha, ar.criterion, ++step});
            return ar.best;
        } catch (const calibration_error&) {
            trace.push_back({-1, k, arma::datum::nan, arma::datum::nan, ++step});
            return CriterionValue::infeasible();
        }
    };
    const BandwidthSearchResult sel =
        golden_section_bandwidth_search(evaluate, eng.k_min, eng.k_max);
    return assemble_direct(eng, "sgwr", sel.bandwidth, best_alpha[sel.bandwidth],
                           std::move(trace), sel.criterion);
}

// ------------------------------------------------------------------
// Backfitting engine for MGWR / M-SGWR.
// ------------------------------------------------------------------
namespace {

// Per-point blended cross-products for one covariate at one bandwidth:
// each alpha candidate is then O(n).
struct UniStats {
    arma::vec sg_xx, sa_xx, sg_xr, sa_xr;
    bool ok = false;
    bool with_attr = false;
};

UniStats uni_stats(const Engine& eng, const arma::vec& xj, const arma::vec& r,
                   int k, bool with_attr)
{
    const arma::uword n = eng.n;
    UniStats st;
    st.sg_xx.set_size(n);
    st.sa_xx.set_size(n);
    st.sg_xr.set_size(n);
    st.sa_xr.set_size(n);
    st.with_attr = with_attr;
    bool ok = true;

#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const arma::uword i = static_cast<arma::uword>(ii);
        if (!ok) continue;
        const double rad = eng.radius(i, k);
        if (!(rad > 0.0)) {
            ok = false;
            continue;
        }
        const arma::vec wg = geographic_weights(eng.D.col(i), rad);
        st.sg_xx(i) = arma::dot(wg, xj % xj);
        st.sg_xr(i) = arma::dot(wg, xj % r);
        if (with_attr) {
            const arma::uvec nb = Engine::support(wg);
            const arma::vec wa = attribute_weights(xj, i, nb, eng.opts.rho);
            st.sa_xx(i) = arma::dot(wa, xj % xj);
            st.sa_xr(i) = arma::dot(wa, xj % r);
        }
    }
    st.ok = ok;
    return st;
}

CriterionValue uni_alpha_criterion(const Engine& eng, const arma::vec& xj,
                                   const arma::vec& r, const UniStats& st,
                                   double alpha)
{
    const arma::uword n = eng.n;
    arma::vec sxx, sxr;
    if (alpha == 1.0 || !st.with_attr) {
        sxx = st.sg_xx;
        sxr = st.sg_xr;
    } else if (alpha == 0.0) {
        sxx = st.sa_xx;
        sxr = st.sa_xr;
    } else {
        sxx = alpha * st.sg_xx + (1.0 - alpha) * st.sa_xx;
        sxr = alpha * st.sg_xr + (1.0 - alpha) * st.sa_xr;
    }
    arma::vec resid(n), lev(n);
    for (arma::uword i = 0; i < n; ++i) {
        if (!(sxx(i) > 0.0)) return CriterionValue::infeasible();
        const double b = sxr(i) / sxx(i);
        resid(i) = r(i) - xj(i) * b;
        lev(i) = xj(i) * xj(i) / sxx(i);  // self weight is exactly 1
    }
    return eng.criterion(resid, lev);
}

struct Backfitter {
    const Engine& eng;
    const arma::uword n;
    const arma::uword m;
    const bool attr_allowed;                  // false for plain multiscale mode
    std::vector<std::optional<int>> pin_bw;
    std::vector<std::optional<double>> pin_alpha;

    arma::mat F;                  // n x m fitted contributions x_j .* beta_j
    arma::mat beta;               // n x m
    std::vector<arma::mat> R;     // projection matrices
    arma::mat S;                  // running sum of R_j
    std::vector<int> bw;
    std::vector<double> alpha;
    SearchTrace trace;

    Backfitter(const Engine& e, bool attr)
        : eng(e), n(e.n), m(e.m), attr_allowed(attr),
          pin_bw(e.m), pin_alpha(e.m) {}

    // Initial single-scale fit: bandwidths start at the single-bandwidth
    // optimum, coefficients at the corresponding direct fit.
    void initialize(int k0, double a0)
    {
        DirectFit f = direct_fit(eng, k0, a0, true);
        beta = std::move(f.beta);
        F = eng.data.X % beta;
        R = std::move(f.R);
        S = std::move(f.S);
        bw.assign(m, k0);
        alpha.assign(m, a0);
    }

    // Does covariate j search alpha at all?
    bool alpha_fixed(arma::uword j, double& fixed) const
    {
        if (!attr_allowed) {
            fixed = 1.0;
            return true;
        }
        if (pin_alpha[j]) {
            fixed = *pin_alpha[j];
            return true;
        }
        return false;
    }

    // One covariate update; returns the accepted criterion.
    void update_covariate(arma::uword j, int sweep)
    {
        const arma::vec xj = eng.data.X.col(j);
        const arma::vec fitted_sum = arma::sum(F, 1);
        const arma::vec r = eng.data.y - fitted_sum + F.col(j);

        double fixed_alpha = 1.0;
        const bool afixed = alpha_fixed(j, fixed_alpha);

        struct KEval {
            double alpha;
            CriterionValue crit;
        };
        std::map<int, KEval> evals;
        auto eval_k = [&](int k) -> CriterionValue {
            const bool need_attr = !afixed || fixed_alpha != 1.0;
            const UniStats st = uni_stats(eng, xj, r, k, need_attr && attr_allowed);
            if (!st.ok) {
                evals[k] = {arma::datum::nan, CriterionValue::infeasible()};
                return CriterionValue::infeasible();
            }
            if (afixed) {
                const CriterionValue c =
                    uni_alpha_criterion(eng, xj, r, st, fixed_alpha);
                evals[k] = {fixed_alpha, c};
                return c;
            }
            try {
                const AlphaSearchResult ar = eng.search_alpha([&](double a) {
                    return uni_alpha_criterion(eng, xj, r, st, a);
                });
                evals[k] = {ar.alpha, ar.best};
                return ar.best;
            } catch (const calibration_error&) {
                evals[k] = {arma::datum::nan, CriterionValue::infeasible()};
                return CriterionValue::infeasible();
            }
        };

        int kj;
        if (pin_bw[j]) {
            kj = *pin_bw[j];
            const CriterionValue c = eval_k(kj);
            if (!c.feasible)
                throw calibration_error("pinned bandwidth infeasible for covariate " +
                                        eng.data.names[j]);
        } else {
            try {
                const BandwidthSearchResult sel = golden_section_bandwidth_search(
                    eval_k, eng.k_min, eng.k_max);
                kj = sel.bandwidth;
            } catch (const calibration_error&) {
                throw calibration_error(
                    "no feasible bandwidth for covariate " + eng.data.names[j]);
            }
        }
        const KEval& acc = evals[kj];

        // Record every tried bandwidth with its optimized alpha; the
        // accepted pair is among them.
        for (const auto& [k, ev] : evals)
            trace.push_back({static_cast<int>(j), k, ev.alpha,
                             ev.crit.feasible ? ev.crit.value : arma::datum::nan,
                             sweep});

        // Rebuild the accepted weights, refresh beta_j, A_j, and R_j.
        arma::mat Aj(n, n);
        arma::vec bj(n);
#pragma omp parallel for schedule(static)
        for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
            const arma::uword i = static_cast<arma::uword>(ii);
            const arma::vec wg = geographic_weights(eng.D.col(i), eng.radius(i, kj));
            arma::vec w;
            if (acc.alpha == 1.0 || !attr_allowed) {
                w = wg;
            } else {
                const arma::uvec nb = Engine::support(wg);
                const arma::vec wa = attribute_weights(xj, i, nb, eng.opts.rho);
                w = combine_weights(wg, wa, acc.alpha);
            }
            const double sxx = arma::dot(w, xj % xj);
            bj(i) = arma::dot(w, xj % r) / sxx;
            Aj.row(i) = (xj(i) / sxx) * (w % xj).t();
        }

        // R_j <- A_j (I - S + R_j), S refreshed afterwards.
        arma::mat B = R[j] - S;
        B.diag() += 1.0;
        arma::mat Rj_new = Aj * B;
        S += Rj_new - R[j];
        R[j] = std::move(Rj_new);

        beta.col(j) = bj;
        F.col(j) = xj % bj;
        bw[j] = kj;
        alpha[j] = acc.alpha;
    }

    // Full calibration loop; returns (converged, iterations).
    std::pair<bool, int> run()
    {
        double rss_old = arma::dot(eng.data.y - arma::sum(F, 1),
                                   eng.data.y - arma::sum(F, 1));
        for (int t = 1; t <= eng.opts.max_iters; ++t) {
            const arma::mat F_old = F;
            for (arma::uword j = 0; j < m; ++j)
                update_covariate(j, t);

            const arma::vec fitted = arma::sum(F, 1);
            const arma::vec e = eng.data.y - fitted;
            const double rss_new = arma::dot(e, e);
            double soc;
            if (eng.opts.soc == SocKind::Rss) {
                soc = std::abs(rss_new - rss_old) / rss_new;
            } else {
                const double num =
                    arma::accu(arma::square(F - F_old)) / static_cast<double>(n);
                soc = std::sqrt(num / arma::dot(fitted, fitted));
            }
            rss_old = rss_new;
            if (soc <= eng.opts.phi) return {true, t};
        }
        return {false, eng.opts.max_iters};
    }
};

} // namespace

FitResult fit_msgwr(const Dataset& data, const FitOptions& opts)
{
    validate_design(data);
    set_threads(opts.threads);
    Engine eng(data, opts);
    const arma::uword m = data.m();
    const bool mgwr_mode = opts.mode == MsgwrMode::MGWR;
    const std::string model_name = mgwr_mode ? "mgwr" : "msgwr";

    // --- pin validation ---
    Pins pins = opts.pins;
    if (pins.bandwidth.empty()) pins.bandwidth.assign(m, std::nullopt);
    if (pins.alpha.empty()) pins.alpha.assign(m, std::nullopt);
    if (pins.bandwidth.size() != m || pins.alpha.size() != m)
        throw parameter_error("pin vectors must have one entry per covariate");
    for (arma::uword j = 0; j < m; ++j) {
        if (pins.bandwidth[j] &&
            (*pins.bandwidth[j] < eng.k_min || *pins.bandwidth[j] > eng.k_max))
            throw parameter_error("pinned bandwidth out of range for covariate " +
                                  data.names[j]);
        if (pins.alpha[j] && !(*pins.alpha[j] >= 0.0 && *pins.alpha[j] <= 1.0))
            throw parameter_error("pinned alpha outside [0,1]");
        if (mgwr_mode && pins.alpha[j] && *pins.alpha[j] != 1.0)
            throw parameter_error("plain multiscale mode requires alpha = 1");
    }

    // --- collapsed configurations: every bandwidth pinned to one shared
    // value and every alpha pinned to one shared value reduce the model to
    // the corresponding direct single-scale fit. ---
    const bool all_bw_pinned =
        std::all_of(pins.bandwidth.begin(), pins.bandwidth.end(),
                    [](const auto& p) { return p.has_value(); });
    const bool all_alpha_pinned =
        mgwr_mode || std::all_of(pins.alpha.begin(), pins.alpha.end(),
                                 [](const auto& p) { return p.has_value(); });
    const auto shared_pin_bw = [&]() -> std::optional<int> {
        if (!all_bw_pinned) return std::nullopt;
        for (arma::uword j = 1; j < m; ++j)
            if (*pins.bandwidth[j] != *pins.bandwidth[0]) return std::nullopt;
        return *pins.bandwidth[0];
    }();
    const auto shared_pin_alpha = [&]() -> std::optional<double> {
        if (mgwr_mode) return 1.0;
        if (!all_alpha_pinned) return std::nullopt;
        for (arma::uword j = 1; j < m; ++j)
            if (*pins.alpha[j] != *pins.alpha[0]) return std::nullopt;
        return *pins.alpha[0];
    }();

    if (shared_pin_bw && shared_pin_alpha) {
        const int k = *shared_pin_bw;
        const double a = *shared_pin_alpha;
        const DirectProbe p = direct_probe(eng, k, a);
        if (!p.ok)
            throw calibration_error("pinned configuration infeasible");
        const CriterionValue c = eng.criterion(p.resid, p.lev);
        SearchTrace trace{{-1, k, a, c.feasible ? c.value : arma::datum::nan, 1}};
        return assemble_direct(eng, model_name, k, a, std::move(trace),
                               c.feasible ? c.value : arma::datum::nan);
    }

    // --- initialization: single-bandwidth optimum; geographic-only in
    // plain multiscale mode, shared-alpha otherwise. ---
    const bool init_alpha_fixed = mgwr_mode || (shared_pin_alpha.has_value());
    const double init_alpha_value = mgwr_mode ? 1.0 : shared_pin_alpha.value_or(1.0);

    int k0;
    double a0;
    std::map<int, double> init_alpha_by_k;
    if (shared_pin_bw) {
        k0 = *shared_pin_bw;
        if (init_alpha_fixed) {
            a0 = init_alpha_value;
        } else {
            const SgwrStacks st = sgwr_stacks(eng, k0);
            if (!st.ok) throw calibration_error("pinned bandwidth infeasible");
            a0 = eng.search_alpha([&](double a) {
                     return sgwr_alpha_criterion(eng, st, a);
                 }).alpha;
        }
    } else {
        auto evaluate = [&](int k) -> CriterionValue {
            if (init_alpha_fixed) {
                const DirectProbe p = direct_probe(eng, k, init_alpha_value);
                return p.ok ? eng.criterion(p.resid, p.lev)
                            : CriterionValue::infeasible();
            }
            const SgwrStacks st = sgwr_stacks(eng, k);
            if (!st.ok) return CriterionValue::infeasible();
            try {
                const AlphaSearchResult ar = eng.search_alpha(
                    [&](double a) { return sgwr_alpha_criterion(eng, st, a); });
                init_alpha_by_k[k] = ar.alpha;
                return ar.best;
            } catch (const calibration_error&) {
                return CriterionValue::infeasible();
            }
        };
        const BandwidthSearchResult sel =
            golden_section_bandwidth_search(evaluate, eng.k_min, eng.k_max);
        k0 = sel.bandwidth;
        a0 = init_alpha_fixed ? init_alpha_value : init_alpha_by_k[k0];
    }

    Backfitter bf(eng, !mgwr_mode);
    bf.pin_bw = pins.bandwidth;
    bf.pin_alpha = pins.alpha;
    bf.initialize(k0, a0);
    const auto [converged, iters] = bf.run();
    if (!converged)
        std::cerr << "warning: backfitting stopped at max_iters without "
                     "reaching the tolerance\n";

    FitResult out;
    out.model = model_name;
    out.beta = bf.beta;
    out.fitted = arma::sum(bf.F, 1);
    out.residuals = data.y - out.fitted;
    out.scales.bandwidth = bf.bw;
    out.scales.alpha = bf.alpha;
    out.trace = std::move(bf.trace);
    out.criterion = opts.criterion == Criterion::CV ? "cv" : "aicc";
    out.converged = converged;
    out.iterations = iters;
    attach_inference(out, data, bf.R);
    if (opts.criterion == Criterion::CV) {
        const CriterionValue c = cv_score(out.residuals, arma::vec(bf.S.diag()));
        out.criterion_value = c.feasible ? c.value : arma::datum::nan;
    } else {
        out.criterion_value = out.diagnostics.aicc;
    }
    return out;
}

} // namespace msgwr
