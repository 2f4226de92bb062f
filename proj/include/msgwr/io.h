#ifndef MSGWR_IO_H
#define MSGWR_IO_H

#include <string>
#include <vector>

#include "msgwr/simulation.h"
#include "msgwr/types.h"

namespace msgwr {

struct ColumnSpec {
    std::string x_col = "u";
    std::string y_col = "v";
    std::string response = "y";
    std::vector<std::string> predictors;  // empty = every remaining column
};

// CSV with header -> Dataset with a prepended intercept column. Errors name
// the offending column or cell; duplicate coordinates only warn (stderr).
Dataset load_dataset(const std::string& path, const ColumnSpec& spec);

// Z-scoring state for the response and non-intercept predictors.
struct Standardizer {
    bool on = false;
    double y_mean = 0.0, y_sd = 1.0;
    arma::vec x_mean;  // m (intercept slot unused)
    arma::vec x_sd;

    Dataset apply(const Dataset& data) const;
};

// Fit and record z-scoring parameters. Throws input_error on a zero-variance
// column (other than the intercept).
Standardizer fit_standardizer(const Dataset& data);

// Writers. Floating-point values serialize with 17 significant digits so
// re-loads and byte-comparisons are exact.
void write_coefficients_csv(const std::string& path, const Dataset& data,
                            const FitResult& fit);
void write_summary_json(const std::string& path, const FitResult& fit,
                        const MoranResult& moran, const Standardizer& std_state,
                        const std::vector<std::string>& names);
void write_trace_csv(const std::string& path, const SearchTrace& trace);

struct CompareRow {
    std::string model;
    MetricBundle metrics;
};
void write_compare_csv(const std::string& path,
                       const std::vector<CompareRow>& rows);
void write_scales_csv(const std::string& path,
                      const std::vector<FitResult>& fits,
                      const std::vector<std::string>& names);

// Simulated-dataset export: `<stem>.csv` (id,u,v,y,x...), sidecar
// `<stem>.true_beta.csv`, and `<stem>.meta.json` (seed, scenario, grid).
void write_simulated(const std::string& stem, const SimulatedDataset& sim);

// A dataset loaded from `<stem>.csv` counts as simulated when the true-beta
// sidecar sits next to it; standardization then defaults off.
bool has_simulation_sidecar(const std::string& csv_path);

// 17-significant-digit decimal rendering used by every writer.
std::string format_double(double v);

} // namespace msgwr

#endif
