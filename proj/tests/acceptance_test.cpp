// Acceptance gate: one line per criterion, [PASS]/[FAIL]/[SKIP], nonzero
// exit when anything fails. argv[1] = path to the CLI binary (used by the
// determinism criterion).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "msgwr/diagnostics.h"
#include "msgwr/errors.h"
#include "msgwr/estimators.h"
#include "msgwr/geometry.h"
#include "msgwr/io.h"
#include "msgwr/local_fit.h"
#include "msgwr/model_selection.h"
#include "msgwr/simulation.h"
#include "msgwr/weights.h"

using namespace msgwr;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kPureGeoSeed = 7;
constexpr std::uint64_t kMixedSeed = 8;

int g_failures = 0;

void report(int num, const std::string& name, bool pass,
            const std::string& detail = "")
{
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << num << ". " << name;
    if (!detail.empty()) std::cout << " — " << detail;
    std::cout << std::endl;
    if (!pass) ++g_failures;
}

void report_skip(int num, const std::string& name, const std::string& why)
{
    std::cout << "[SKIP] " << num << ". " << name << " — " << why << std::endl;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// ------------------------------------------------------------------
// 1. Reduction lattice on the pure-geographic simulation (20 x 20).
// ------------------------------------------------------------------
void criterion_reductions()
{
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset data = gen_pure_geographic(kPureGeoSeed, 20).dataset;
    const arma::uword m = data.m();
    bool pass = true;
    std::string detail;

    const FitResult gwr = fit_gwr(data);
    {
        FitOptions pinned;
        pinned.pins.bandwidth.assign(m, gwr.scales.bandwidth[0]);
        pinned.pins.alpha.assign(m, 1.0);
        const FitResult red = fit_msgwr(data, pinned);
        const double db = arma::abs(red.beta - gwr.beta).max();
        const double df = arma::abs(red.fitted - gwr.fitted).max();
        const double da = std::abs(red.diagnostics.aicc - gwr.diagnostics.aicc);
        if (db > 1e-8 || df > 1e-8 || da > 1e-8) {
            pass = false;
            detail += "gwr collapse off by " + fmt(std::max({db, df, da})) + "; ";
        }
    }
    {
        const FitResult sgwr = fit_sgwr(data);
        FitOptions pinned;
        pinned.pins.bandwidth.assign(m, sgwr.scales.bandwidth[0]);
        pinned.pins.alpha.assign(m, sgwr.scales.alpha[0]);
        const FitResult red = fit_msgwr(data, pinned);
        const double db = arma::abs(red.beta - sgwr.beta).max();
        const double df = arma::abs(red.fitted - sgwr.fitted).max();
        const double da = std::abs(red.diagnostics.aicc - sgwr.diagnostics.aicc);
        if (db > 1e-8 || df > 1e-8 || da > 1e-8) {
            pass = false;
            detail += "sgwr collapse off by " + fmt(std::max({db, df, da})) + "; ";
        }
    }
    {
        FitOptions mgwr_opts;
        mgwr_opts.mode = MsgwrMode::MGWR;
        const FitResult mgwr = fit_msgwr(data, mgwr_opts);
        FitOptions pinned;
        pinned.pins.alpha.assign(m, 1.0);
        const FitResult red = fit_msgwr(data, pinned);
        const double db = arma::abs(red.beta - mgwr.beta).max();
        const double df = arma::abs(red.fitted - mgwr.fitted).max();
        const double da = std::abs(red.diagnostics.aicc - mgwr.diagnostics.aicc);
        if (db > 1e-8 || df > 1e-8 || da > 1e-8) {
            pass = false;
            detail += "mgwr equivalence off by " + fmt(std::max({db, df, da})) + "; ";
        }
    }
    const double elapsed = seconds_since(t0);
    if (elapsed > 120.0) {
        pass = false;
        detail += "runtime " + fmt(elapsed) + "s > 120s; ";
    }
    report(1, "reduction lattice (pinned msgwr collapses to gwr/sgwr/mgwr)",
           pass, detail.empty() ? fmt(elapsed) + "s" : detail);
}

// ------------------------------------------------------------------
// 2. Pure-geographic recovery: every mixing weight lands exactly on 1.
// ------------------------------------------------------------------
void criterion_pure_geo_alpha()
{
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset data = gen_pure_geographic(kPureGeoSeed, 30).dataset;
    const FitResult fit = fit_msgwr(data, FitOptions{});
    bool pass = fit.converged;
    std::string detail = "alpha = [";
    for (std::size_t j = 0; j < fit.scales.alpha.size(); ++j) {
        if (fit.scales.alpha[j] != 1.0) pass = false;
        detail += (j ? ", " : "") + fmt(fit.scales.alpha[j]);
    }
    detail += "]";
    const double elapsed = seconds_since(t0);
    if (elapsed > 900.0) {
        pass = false;
        detail += ", runtime " + fmt(elapsed) + "s > 900s";
    } else {
        detail += ", " + fmt(elapsed) + "s";
    }
    report(2, "pure-geographic simulation recovers alpha = 1 everywhere", pass,
           detail);
}

// ------------------------------------------------------------------
// 3. Mixed-effects pattern: endpoints for the geographic coefficients,
//    interior mixing for the contextual ones, plus accuracy dominance.
// ------------------------------------------------------------------
void criterion_mixed_alpha()
{
    const auto t0 = std::chrono::steady_clock::now();
    const SimulatedDataset sim = gen_mixed_effects(kMixedSeed, 30);
    const FitResult msgwr = fit_msgwr(sim.dataset, FitOptions{});
    FitOptions mgwr_opts;
    mgwr_opts.mode = MsgwrMode::MGWR;
    const FitResult mgwr = fit_msgwr(sim.dataset, mgwr_opts);

    bool pass = true;
    std::string detail = "alpha = [";
    for (std::size_t j = 0; j < msgwr.scales.alpha.size(); ++j)
        detail += (j ? ", " : "") + fmt(msgwr.scales.alpha[j]);
    detail += "]";

    if (msgwr.scales.alpha[0] != 1.0 || msgwr.scales.alpha[1] != 1.0)
        pass = false;
    for (std::size_t j = 2; j < 5; ++j)
        if (msgwr.scales.alpha[j] > 0.9) pass = false;

    const RecoveryScore rs_m = score_recovery(sim.true_beta, msgwr.beta);
    const RecoveryScore rs_g = score_recovery(sim.true_beta, mgwr.beta);
    for (arma::uword j = 2; j < 5; ++j) {
        if (rs_m.rmse(j) > rs_g.rmse(j)) {
            pass = false;
            detail += ", rmse b" + std::to_string(j) + " " + fmt(rs_m.rmse(j)) +
                      " > " + fmt(rs_g.rmse(j));
        }
    }
    if (msgwr.diagnostics.aicc > mgwr.diagnostics.aicc) {
        pass = false;
        detail += ", aicc " + fmt(msgwr.diagnostics.aicc) + " > " +
                  fmt(mgwr.diagnostics.aicc);
    }
    detail += ", " + fmt(seconds_since(t0)) + "s";
    report(3, "mixed simulation: endpoint/interior alpha pattern and accuracy",
           pass, detail);
}

// ------------------------------------------------------------------
// 4. The leverage-corrected score is literal leave-one-out.
// ------------------------------------------------------------------
void criterion_press()
{
    std::mt19937 rng(99);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> pick_n(10, 30);
    bool pass = true;
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const arma::uword n = pick_n(rng);
        arma::mat X(n, 3);
        X.col(0).ones();
        for (arma::uword j = 1; j < 3; ++j)
            for (arma::uword i = 0; i < n; ++i) X(i, j) = normal(rng);
        arma::vec y(n);
        for (auto& v : y) v = normal(rng);

        const arma::mat H = X * arma::inv(X.t() * X) * X.t();
        const CriterionValue cv = cv_score(y - H * y, H.diag());

        double press = 0.0;
        for (arma::uword i = 0; i < n; ++i) {
            arma::mat Xi = X;
            arma::vec yi = y;
            Xi.shed_row(i);
            yi.shed_row(i);
            const double e = y(i) - arma::dot(X.row(i), arma::solve(Xi, yi));
            press += e * e;
        }
        const double diff =
            std::abs(cv.value - press / static_cast<double>(n));
        worst = std::max(worst, diff);
        if (!cv.feasible || diff > 1e-10) pass = false;
    }
    report(4, "cv score equals literal leave-one-out refits", pass,
           "max deviation " + fmt(worst));
}

// ------------------------------------------------------------------
// 5. Fixed-point arithmetic checks for the criterion and both kernels.
// ------------------------------------------------------------------
void criterion_point_values()
{
    bool pass = true;
    std::string detail;

    const CriterionValue a = aicc(100, 1.0, 5.0);
    if (!a.feasible || std::abs(a.value - 296.6909324473862) > 1e-6) {
        pass = false;
        detail += "aicc " + fmt(a.value) + "; ";
    }

    const arma::vec w = geographic_weights(arma::vec{0.0, 1.0}, 2.0);
    if (std::abs(w(1) - 0.5625) > 1e-12) {
        pass = false;
        detail += "bisquare(half radius) " + fmt(w(1)) + "; ";
    }

    // {0, 1, +-sqrt(1.625)}: population variance exactly 1, so the pair
    // (0, 1) is one standard deviation apart and must weigh 0.5.
    const double t = std::sqrt(1.625);
    const arma::vec x = {0.0, 1.0, t, -t};
    const arma::vec aw = attribute_weights(x, 0, arma::uvec{0, 1, 2, 3});
    if (std::abs(aw(1) - 0.5) > 1e-12) {
        pass = false;
        detail += "attribute(delta=sd) " + fmt(aw(1)) + "; ";
    }
    report(5, "aicc constant and kernel point values", pass, detail);
}

// ------------------------------------------------------------------
// 6. Local weighted solves against brute-force normal equations.
// ------------------------------------------------------------------
void criterion_wls_oracle()
{
    std::mt19937 rng(123);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> wunif(0.01, 1.0);
    std::uniform_int_distribution<int> pick_n(12, 40);
    std::uniform_int_distribution<int> pick_m(2, 5);
    bool pass = true;
    double worst_beta = 0.0, worst_sum = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const arma::uword n = pick_n(rng);
        const arma::uword m = pick_m(rng);
        arma::mat X(n, m);
        X.col(0).ones();
        for (arma::uword j = 1; j < m; ++j)
            for (arma::uword i = 0; i < n; ++i) X(i, j) = normal(rng);
        arma::vec y(n), w(n);
        for (auto& v : y) v = normal(rng);
        for (auto& v : w) v = wunif(rng);
        const arma::uword i = rep % n;

        const LocalFitRow fit = weighted_least_squares(X, y, w, i);
        const arma::mat W = arma::diagmat(w);
        const arma::vec oracle = arma::inv(X.t() * W * X) * X.t() * W * y;
        worst_beta = std::max(worst_beta,
                              arma::abs(fit.beta - oracle).max());
        worst_sum = std::max(worst_sum,
                             std::abs(arma::accu(fit.hat_row) - 1.0));
        if (worst_beta > 1e-10 || worst_sum > 1e-10) pass = false;
    }
    report(6, "weighted solves match brute-force normal equations", pass,
           "max beta dev " + fmt(worst_beta) + ", max hat-row sum dev " +
               fmt(worst_sum));
}

// ------------------------------------------------------------------
// 7. Inference bundle consistency and the Moran expectation.
// ------------------------------------------------------------------
void criterion_inference()
{
    const Dataset data = gen_pure_geographic(kPureGeoSeed, 10).dataset;
    const FitResult fit = fit_gwr(data);
    bool pass = true;
    std::string detail;

    if (std::abs(fit.enp_model - arma::accu(fit.enp_per_covariate)) > 1e-8) {
        pass = false;
        detail += "enp mismatch; ";
    }
    if (!(fit.se.min() > 0.0)) {
        pass = false;
        detail += "nonpositive se; ";
    }
    for (arma::uword i = 0; i < data.n() && pass; ++i)
        for (arma::uword j = 0; j < data.m(); ++j)
            if (std::abs(fit.t_values(i, j) -
                         fit.beta(i, j) / fit.se(i, j)) > 1e-12) {
                pass = false;
                detail += "t != beta/se; ";
                break;
            }

    std::mt19937 rng(6);
    std::normal_distribution<double> normal(0.0, 1.0);
    arma::vec e(616);
    arma::mat coords(616, 2);
    for (auto& v : e) v = normal(rng);
    for (auto& v : coords) v = normal(rng);
    const MoranResult mr = morans_i(e, coords);
    if (mr.expected != -1.0 / 615.0) {
        pass = false;
        detail += "moran expectation; ";
    }
    report(7, "inference identities (enp, se, t, Moran expectation)", pass,
           detail);
}

// ------------------------------------------------------------------
// 8. Search routines on synthetic criteria.
// ------------------------------------------------------------------
void criterion_searches()
{
    bool pass = true;
    std::string detail;

    std::mt19937 rng(2718);
    std::uniform_int_distribution<int> pick(5, 300);
    for (int rep = 0; rep < 50; ++rep) {
        const int target = pick(rng);
        const auto f = [target](int k) {
            CriterionValue c;
            c.value = (k - target) * double(k - target);
            c.feasible = true;
            return c;
        };
        int best = -1;
        double best_v = arma::datum::inf;
        for (int k = 5; k <= 300; ++k)
            if (f(k).value < best_v) {
                best_v = f(k).value;
                best = k;
            }
        const BandwidthSearchResult res =
            golden_section_bandwidth_search(f, 5, 300);
        if (res.bandwidth != best) {
            pass = false;
            detail += "gss missed " + std::to_string(target) + "; ";
        }
    }

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const double target = unif(rng);
        const auto f = [target](double a) {
            CriterionValue c;
            c.value = (a - target) * (a - target);
            c.feasible = true;
            return c;
        };
        const AlphaSearchResult res = alpha_search_dnc(f, 0.005);
        if (std::abs(res.alpha - target) > 0.005 + 1e-12) {
            pass = false;
            detail += "dnc missed " + fmt(target) + " by " +
                      fmt(std::abs(res.alpha - target)) + "; ";
        }
    }

    const auto two_basin = [](double a) {
        CriterionValue c;
        c.value = std::min((a - 0.15) * (a - 0.15) + 0.05,
                           (a - 0.85) * (a - 0.85));
        c.feasible = true;
        return c;
    };
    const AlphaSearchResult g = alpha_search_greedy(two_basin);
    if (std::abs(g.alpha - 0.85) > 0.011) {
        pass = false;
        detail += "greedy stuck at " + fmt(g.alpha) + "; ";
    }
    report(8, "bandwidth and alpha searches solve synthetic minima", pass,
           detail);
}

// ------------------------------------------------------------------
// 9. Byte-identical repeated comparison runs through the CLI.
// ------------------------------------------------------------------
std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_determinism(const std::string& cli)
{
    if (cli.empty()) {
        report_skip(9, "determinism of repeated comparison runs",
                    "CLI path not supplied");
        return;
    }
    const fs::path dir = fs::path("acceptance_tmp");
    fs::create_directories(dir);
    const std::string stem = (dir / "det").string();
    const std::string quiet = " >/dev/null 2>&1";

    const std::string sim_cmd = cli + " simulate --scenario mixed --seed " +
                                std::to_string(kMixedSeed) +
                                " --grid 12 --out " + stem;
    bool pass = std::system((sim_cmd + quiet).c_str()) == 0;
    for (int run = 1; run <= 2 && pass; ++run) {
        const std::string cmd = cli + " compare --data " + stem +
                                ".csv --out " + stem + "_run" +
                                std::to_string(run);
        pass = std::system((cmd + quiet).c_str()) == 0;
    }
    if (pass) {
        const std::string c1 = slurp(stem + "_run1.compare.csv");
        const std::string c2 = slurp(stem + "_run2.compare.csv");
        const std::string s1 = slurp(stem + "_run1.scales.csv");
        const std::string s2 = slurp(stem + "_run2.scales.csv");
        pass = !c1.empty() && c1 == c2 && !s1.empty() && s1 == s2;
    }
    report(9, "two comparison runs produce byte-identical tables", pass);
}

// ------------------------------------------------------------------
// 10. Optional external epidemiological dataset.
// ------------------------------------------------------------------
void criterion_external(const std::string& cli)
{
    (void)cli;
    std::string path = "data/covid.csv";
    if (const char* env = std::getenv("MSGWR_COVID_DATA")) path = env;
    if (!fs::exists(path)) {
        report_skip(10, "external county dataset benchmarks",
                    "dataset not present (set MSGWR_COVID_DATA to enable)");
        return;
    }
    bool pass = true;
    std::string detail;
    try {
        const Dataset raw = load_dataset(path, ColumnSpec{});
        const Standardizer st = fit_standardizer(raw);
        const Dataset data = st.apply(raw);

        const FitResult ols = fit_ols(data);
        if (std::abs(ols.diagnostics.adj_r2 - 0.536) > 0.02) {
            pass = false;
            detail += "ols adj_r2 " + fmt(ols.diagnostics.adj_r2) + "; ";
        }
        std::vector<FitResult> fits;
        fits.push_back(ols);
        fits.push_back(fit_gwr(data));
        fits.push_back(fit_sgwr(data));
        FitOptions mg;
        mg.mode = MsgwrMode::MGWR;
        fits.push_back(fit_msgwr(data, mg));
        fits.push_back(fit_msgwr(data, FitOptions{}));
        double best = arma::datum::inf;
        std::string best_model;
        for (const auto& f : fits)
            if (f.diagnostics.aicc < best) {
                best = f.diagnostics.aicc;
                best_model = f.model;
            }
        if (best_model != "msgwr") {
            pass = false;
            detail += "aicc ranking led by " + best_model + "; ";
        }
    } catch (const std::exception& e) {
        pass = false;
        detail = e.what();
    }
    report(10, "external county dataset benchmarks", pass, detail);
}

} // namespace

int main(int argc, char** argv)
{
    const std::string cli = argc > 1 ? argv[1] : "";
    std::cout << "acceptance gate\n" << std::string(64, '-') << "\n";

    criterion_reductions();
    criterion_pure_geo_alpha();
    criterion_mixed_alpha();
    criterion_press();
    criterion_point_values();
    criterion_wls_oracle();
    criterion_inference();
    criterion_searches();
    criterion_determinism(cli);
    criterion_external(cli);

    std::cout << std::string(64, '-') << "\n";
    if (g_failures == 0) {
        std::cout << "all criteria passed\n";
        return 0;
    }
    std::cout << g_failures << " criterion(s) failed\n";
    return 1;
}
