// Command-line driver: fit | simulate | compare | trace.
//
// Exit codes: 0 success, 2 input/parameter error, 3 calibration/numeric
// error, 4 backfitting did not converge. On a nonzero exit every output file
// written so far is removed unless --keep-partial is given.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "msgwr/diagnostics.h"
#include "msgwr/errors.h"
#include "msgwr/estimators.h"
#include "msgwr/io.h"
#include "msgwr/simulation.h"

namespace {

struct RunConfig {
    std::string data_path;
    msgwr::ColumnSpec columns;
    std::string predictors_raw;
    std::string model = "msgwr";
    std::string criterion = "aicc";
    std::string alpha_search = "dnc";
    double phi = 1e-5;
    std::string soc = "coef";
    int max_iters = 200;
    std::string standardize = "auto";
    std::uint64_t seed = 1;
    int moran_k = 8;
    bool moran_permutation = false;
    int threads = 0;
    bool keep_partial = false;
    std::string out_stem;
    std::string pin_bandwidth_raw;
    std::string pin_alpha_raw;

    // simulate only
    std::string scenario = "pure-geo";
    int grid_side = 30;
    double noise_sd = 0.9;
};

std::vector<std::string> split_list(const std::string& raw)
{
    std::vector<std::string> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

// Files written by the current command, for failure cleanup.
struct OutputTracker {
    std::vector<std::string> files;
    bool keep = false;

    std::string track(const std::string& path)
    {
        files.push_back(path);
        return path;
    }
    void cleanup_on_failure() const
    {
        if (keep) return;
        for (const auto& f : files) {
            std::error_code ec;
            std::filesystem::remove(f, ec);
        }
    }
};

msgwr::FitOptions build_options(const RunConfig& cfg, arma::uword m)
{
    msgwr::FitOptions opts;
    opts.criterion = cfg.criterion == "cv" ? msgwr::Criterion::CV
                                           : msgwr::Criterion::AICc;
    opts.alpha_search = cfg.alpha_search == "greedy"
                            ? msgwr::AlphaSearchKind::Greedy
                            : msgwr::AlphaSearchKind::DnC;
    opts.phi = cfg.phi;
    opts.soc = cfg.soc == "rss" ? msgwr::SocKind::Rss : msgwr::SocKind::Coef;
    opts.max_iters = cfg.max_iters;
    opts.threads = cfg.threads;

    auto parse_pins = [m](const std::string& raw, bool is_alpha,
                          msgwr::Pins& pins) {
        if (raw.empty()) return;
        const auto items = split_list(raw);
        if (items.size() != m)
            throw msgwr::parameter_error(
                "pin list needs one entry per design column (" +
                std::to_string(m) + "), '.' for free");
        for (std::size_t j = 0; j < items.size(); ++j) {
            if (items[j] == "." || items[j].empty()) continue;
            if (is_alpha)
                pins.alpha[j] = std::stod(items[j]);
            else
                pins.bandwidth[j] = std::stoi(items[j]);
        }
    };
    opts.pins.bandwidth.assign(m, std::nullopt);
    opts.pins.alpha.assign(m, std::nullopt);
    parse_pins(cfg.pin_bandwidth_raw, false, opts.pins);
    parse_pins(cfg.pin_alpha_raw, true, opts.pins);
    return opts;
}

msgwr::FitResult dispatch_fit(const std::string& model,
                              const msgwr::Dataset& data,
                              msgwr::FitOptions opts)
{
    if (model == "ols") return msgwr::fit_ols(data);
    if (model == "gwr") return msgwr::fit_gwr(data, opts);
    if (model == "sgwr") return msgwr::fit_sgwr(data, opts);
    if (model == "mgwr") {
        opts.mode = msgwr::MsgwrMode::MGWR;
        return msgwr::fit_msgwr(data, opts);
    }
    opts.mode = msgwr::MsgwrMode::MSGWR;
    return msgwr::fit_msgwr(data, opts);
}

struct LoadedData {
    msgwr::Dataset raw;
    msgwr::Dataset fitted;  // standardized when enabled
    msgwr::Standardizer std_state;
};

LoadedData load_and_prepare(const RunConfig& cfg)
{
    LoadedData ld;
    msgwr::ColumnSpec spec = cfg.columns;
    if (!cfg.predictors_raw.empty()) spec.predictors = split_list(cfg.predictors_raw);
    ld.raw = msgwr::load_dataset(cfg.data_path, spec);

    bool standardize;
    if (cfg.standardize == "on") {
        standardize = true;
    } else if (cfg.standardize == "off") {
        standardize = false;
    } else {
        standardize = !msgwr::has_simulation_sidecar(cfg.data_path);
        std::cerr << "standardization " << (standardize ? "on" : "off")
                  << " (auto)\n";
    }
    if (standardize) {
        ld.std_state = msgwr::fit_standardizer(ld.raw);
        ld.fitted = ld.std_state.apply(ld.raw);
    } else {
        ld.fitted = ld.raw;
    }
    return ld;
}

int run_fit(const RunConfig& cfg, OutputTracker& outputs, bool trace_only)
{
    const LoadedData ld = load_and_prepare(cfg);
    const msgwr::FitOptions opts = build_options(cfg, ld.fitted.m());
    const msgwr::FitResult fit = dispatch_fit(cfg.model, ld.fitted, opts);

    if (trace_only && cfg.out_stem.empty()) {
        std::cout << "covariate,bandwidth,alpha,criterion,iteration\n";
        for (const auto& s : fit.trace)
            std::cout << s.covariate << ',' << s.bandwidth << ','
                      << msgwr::format_double(s.alpha) << ','
                      << msgwr::format_double(s.criterion) << ','
                      << s.iteration << "\n";
    } else if (trace_only) {
        msgwr::write_trace_csv(outputs.track(cfg.out_stem + ".trace.csv"),
                               fit.trace);
    } else {
        const msgwr::MoranResult moran =
            msgwr::morans_i(fit.residuals, ld.fitted.coords, cfg.moran_k,
                            cfg.moran_permutation, 999, cfg.seed);
        msgwr::write_coefficients_csv(
            outputs.track(cfg.out_stem + ".coefficients.csv"), ld.fitted, fit);
        msgwr::write_summary_json(outputs.track(cfg.out_stem + ".summary.json"),
                                  fit, moran, ld.std_state, ld.fitted.names);
        msgwr::write_trace_csv(outputs.track(cfg.out_stem + ".trace.csv"),
                               fit.trace);
    }

    if (!fit.converged) {
        std::cerr << "error: calibration did not converge within "
                  << cfg.max_iters << " sweeps\n";
        return 4;
    }
    std::cerr << fit.model << ": criterion " << fit.criterion << " = "
              << msgwr::format_double(fit.criterion_value) << ", adj R2 = "
              << msgwr::format_double(fit.diagnostics.adj_r2) << "\n";
    return 0;
}

int run_compare(const RunConfig& cfg, OutputTracker& outputs)
{
    const LoadedData ld = load_and_prepare(cfg);
    const msgwr::FitOptions opts = build_options(cfg, ld.fitted.m());

    const std::vector<std::string> order = {"ols", "gwr", "sgwr", "mgwr",
                                            "msgwr"};
    std::vector<msgwr::FitResult> fits;
    bool all_converged = true;
    for (const auto& model : order) {
        std::cerr << "fitting " << model << "...\n";
        fits.push_back(dispatch_fit(model, ld.fitted, opts));
        all_converged = all_converged && fits.back().converged;
    }

    std::vector<msgwr::CompareRow> rows;
    for (const auto& f : fits) rows.push_back({f.model, f.diagnostics});
    msgwr::write_compare_csv(outputs.track(cfg.out_stem + ".compare.csv"), rows);
    msgwr::write_scales_csv(outputs.track(cfg.out_stem + ".scales.csv"), fits,
                            ld.fitted.names);

    if (!all_converged) {
        std::cerr << "error: at least one calibration did not converge\n";
        return 4;
    }
    return 0;
}

int run_simulate(const RunConfig& cfg, OutputTracker& outputs)
{
    msgwr::SimulatedDataset sim;
    if (cfg.scenario == "pure-geo" || cfg.scenario == "pure_geo") {
        sim = msgwr::gen_pure_geographic(cfg.seed, cfg.grid_side, cfg.noise_sd);
    } else if (cfg.scenario == "mixed") {
        sim = msgwr::gen_mixed_effects(cfg.seed, cfg.grid_side, cfg.noise_sd);
    } else {
        throw msgwr::parameter_error("unknown scenario '" + cfg.scenario +
                                     "' (pure-geo | mixed)");
    }
    outputs.track(cfg.out_stem + ".csv");
    outputs.track(cfg.out_stem + ".true_beta.csv");
    outputs.track(cfg.out_stem + ".meta.json");
    msgwr::write_simulated(cfg.out_stem, sim);
    std::cerr << "wrote " << sim.dataset.n() << " rows (" << cfg.scenario
              << ", seed " << sim.seed << ") to " << cfg.out_stem << ".csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Local regression with per-covariate spatial scales and "
                 "geographic/attribute weight blending"};
    app.require_subcommand(1);

    RunConfig cfg;
    if (const char* env_seed = std::getenv("MSGWR_SEED"))
        cfg.seed = std::strtoull(env_seed, nullptr, 10);
    const bool seed_from_env = std::getenv("MSGWR_SEED") != nullptr;

    auto add_data_flags = [&](CLI::App* sub) {
        sub->add_option("--data", cfg.data_path, "input CSV path")->required();
        sub->add_option("--x-col", cfg.columns.x_col, "x-coordinate column");
        sub->add_option("--y-col", cfg.columns.y_col, "y-coordinate column");
        sub->add_option("--response", cfg.columns.response, "response column");
        sub->add_option("--predictors", cfg.predictors_raw,
                        "comma-separated predictor columns (default: all "
                        "remaining)");
        sub->add_option("--standardize", cfg.standardize,
                        "z-score response and predictors")
            ->check(CLI::IsMember({"auto", "on", "off"}));
    };
    auto add_fit_flags = [&](CLI::App* sub) {
        sub->add_option("--model", cfg.model, "ols | gwr | sgwr | mgwr | msgwr")
            ->check(CLI::IsMember({"ols", "gwr", "sgwr", "mgwr", "msgwr"}));
        sub->add_option("--criterion", cfg.criterion, "selection criterion")
            ->check(CLI::IsMember({"aicc", "cv"}));
        sub->add_option("--alpha-search", cfg.alpha_search, "alpha optimizer")
            ->check(CLI::IsMember({"dnc", "greedy"}));
        sub->add_option("--phi", cfg.phi, "convergence tolerance");
        sub->add_option("--soc", cfg.soc, "convergence score")
            ->check(CLI::IsMember({"coef", "rss"}));
        sub->add_option("--max-iters", cfg.max_iters, "backfitting sweep cap");
        sub->add_option("--pin-bandwidth", cfg.pin_bandwidth_raw,
                        "per-column bandwidth pins, '.' = free");
        sub->add_option("--pin-alpha", cfg.pin_alpha_raw,
                        "per-column alpha pins, '.' = free");
        sub->add_option("--threads", cfg.threads, "worker thread cap");
    };

    CLI::App* fit = app.add_subcommand("fit", "calibrate one model");
    add_data_flags(fit);
    add_fit_flags(fit);
    fit->add_option("--moran-k", cfg.moran_k, "residual Moran neighbor count");
    fit->add_flag("--moran-permutation", cfg.moran_permutation,
                  "add a permutation p-value (999 draws)");
    fit->add_option("--seed", cfg.seed, "seed for the permutation test");
    fit->add_flag("--keep-partial", cfg.keep_partial,
                  "keep output files on failure");
    fit->add_option("--out", cfg.out_stem, "output stem")->required();

    CLI::App* sim = app.add_subcommand("simulate", "write a synthetic dataset");
    sim->add_option("--scenario", cfg.scenario, "pure-geo | mixed")->required();
    sim->add_option("--seed", cfg.seed, "generator seed");
    sim->add_option("--grid", cfg.grid_side, "grid side length (n = side^2)");
    sim->add_option("--noise-sd", cfg.noise_sd, "response noise sd");
    sim->add_flag("--keep-partial", cfg.keep_partial,
                  "keep output files on failure");
    sim->add_option("--out", cfg.out_stem, "output stem")->required();

    CLI::App* cmp = app.add_subcommand(
        "compare", "fit ols, gwr, sgwr, mgwr, msgwr and tabulate");
    add_data_flags(cmp);
    add_fit_flags(cmp);
    cmp->add_option("--seed", cfg.seed, "seed (reserved for permutation use)");
    cmp->add_flag("--keep-partial", cfg.keep_partial,
                  "keep output files on failure");
    cmp->add_option("--out", cfg.out_stem, "output stem")->required();

    CLI::App* trc = app.add_subcommand(
        "trace", "run one calibration and emit only its search trace");
    add_data_flags(trc);
    add_fit_flags(trc);
    trc->add_flag("--keep-partial", cfg.keep_partial,
                  "keep output files on failure");
    trc->add_option("--out", cfg.out_stem,
                    "output stem (omit to print to stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (seed_from_env) {
        if (const char* env_seed = std::getenv("MSGWR_SEED"))
            cfg.seed = std::strtoull(env_seed, nullptr, 10);
    }

    OutputTracker outputs;
    outputs.keep = cfg.keep_partial;
    int code = 0;
    try {
        if (app.got_subcommand(fit)) code = run_fit(cfg, outputs, false);
        else if (app.got_subcommand(sim)) code = run_simulate(cfg, outputs);
        else if (app.got_subcommand(cmp)) code = run_compare(cfg, outputs);
        else code = run_fit(cfg, outputs, true);
    } catch (const msgwr::input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        code = 2;
    } catch (const msgwr::parameter_error& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        code = 2;
    } catch (const msgwr::calibration_error& e) {
        std::cerr << "calibration error: " << e.what() << "\n";
        code = 3;
    } catch (const msgwr::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        code = 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        code = 3;
    }
    if (code != 0) outputs.cleanup_on_failure();
    return code;
}
