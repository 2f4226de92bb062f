#include "msgwr/io.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "msgwr/errors.h"

namespace msgwr {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_cell(const std::string& cell, std::size_t row,
                  const std::string& column)
{
    const std::string t = trim(cell);
    if (t.empty())
        throw input_error("empty value at row " + std::to_string(row) +
                          ", column '" + column + "'");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size())
        throw input_error("non-numeric value '" + t + "' at row " +
                          std::to_string(row) + ", column '" + column + "'");
    if (!std::isfinite(v))
        throw input_error("non-finite value at row " + std::to_string(row) +
                          ", column '" + column + "'");
    return v;
}

std::size_t column_index(const std::vector<std::string>& header,
                         const std::string& name)
{
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
        throw input_error("column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - header.begin());
}

void warn_on_duplicates_and_degrees(const arma::mat& coords)
{
    std::vector<std::pair<double, double>> pts(coords.n_rows);
    for (arma::uword i = 0; i < coords.n_rows; ++i)
        pts[i] = {coords(i, 0), coords(i, 1)};
    std::sort(pts.begin(), pts.end());
    std::size_t dups = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i] == pts[i - 1]) ++dups;
    if (dups > 0)
        std::cerr << "warning: " << dups
                  << " duplicate coordinate pair(s); adaptive bandwidths may "
                     "collapse at small neighbor counts\n";

    const double umax = arma::abs(coords.col(0)).max();
    const double vmax = arma::abs(coords.col(1)).max();
    const double uspan = coords.col(0).max() - coords.col(0).min();
    const double vspan = coords.col(1).max() - coords.col(1).min();
    if (umax <= 180.0 && vmax <= 90.0 && (uspan > 1.0 || vspan > 1.0))
        std::cerr << "warning: coordinates look like lon/lat degrees; "
                     "distances are computed on the plane\n";
}

std::ofstream open_output(const std::string& path)
{
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path);
    if (!out) throw input_error("cannot open '" + path + "' for writing");
    return out;
}

} // namespace

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Dataset load_dataset(const std::string& path, const ColumnSpec& spec)
{
    std::ifstream in(path);
    if (!in) throw input_error("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw input_error("'" + path + "' is empty");
    const std::vector<std::string> header = split_csv_line(line);

    const std::size_t xi = column_index(header, spec.x_col);
    const std::size_t yi = column_index(header, spec.y_col);
    const std::size_t ri = column_index(header, spec.response);

    std::vector<std::string> predictors = spec.predictors;
    if (predictors.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c == xi || c == yi || c == ri) continue;
            if (header[c] == "id") continue;
            predictors.push_back(header[c]);
        }
    }
    if (predictors.empty())
        throw input_error("no predictor columns in '" + path + "'");
    std::vector<std::size_t> pidx;
    for (const auto& p : predictors) pidx.push_back(column_index(header, p));

    std::vector<std::vector<double>> rows;
    std::size_t rownum = 1;  // header is row 1
    while (std::getline(in, line)) {
        ++rownum;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw input_error("row " + std::to_string(rownum) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(header.size()));
        std::vector<double> row;
        row.reserve(3 + pidx.size());
        row.push_back(parse_cell(cells[xi], rownum, spec.x_col));
        row.push_back(parse_cell(cells[yi], rownum, spec.y_col));
        row.push_back(parse_cell(cells[ri], rownum, spec.response));
        for (std::size_t j = 0; j < pidx.size(); ++j)
            row.push_back(parse_cell(cells[pidx[j]], rownum, predictors[j]));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw input_error("'" + path + "' has no data rows");

    const arma::uword n = rows.size();
    const arma::uword m = pidx.size() + 1;
    Dataset data;
    data.coords.set_size(n, 2);
    data.y.set_size(n);
    data.X.set_size(n, m);
    for (arma::uword i = 0; i < n; ++i) {
        data.coords(i, 0) = rows[i][0];
        data.coords(i, 1) = rows[i][1];
        data.y(i) = rows[i][2];
        data.X(i, 0) = 1.0;
        for (arma::uword j = 1; j < m; ++j) data.X(i, j) = rows[i][2 + j];
    }
    data.names.push_back("intercept");
    for (const auto& p : predictors) data.names.push_back(p);

    std::cerr << "loaded " << n << " rows, " << m
              << " design columns (incl. intercept) from '" << path << "'\n";
    warn_on_duplicates_and_degrees(data.coords);
    return data;
}

Standardizer fit_standardizer(const Dataset& data)
{
    const arma::uword n = data.n();
    const arma::uword m = data.m();
    Standardizer s;
    s.on = true;
    s.y_mean = arma::mean(data.y);
    s.y_sd = std::sqrt(arma::accu(arma::square(data.y - s.y_mean)) /
                       static_cast<double>(n));
    if (s.y_sd == 0.0) throw input_error("response has zero variance");
    s.x_mean.zeros(m);
    s.x_sd.ones(m);
    for (arma::uword j = 1; j < m; ++j) {
        s.x_mean(j) = arma::mean(data.X.col(j));
        s.x_sd(j) = std::sqrt(
            arma::accu(arma::square(data.X.col(j) - s.x_mean(j))) /
            static_cast<double>(n));
        if (s.x_sd(j) == 0.0)
            throw input_error("predictor '" + data.names[j] +
                              "' has zero variance");
    }
    return s;
}

Dataset Standardizer::apply(const Dataset& data) const
{
    if (!on) return data;
    Dataset out = data;
    out.y = (data.y - y_mean) / y_sd;
    for (arma::uword j = 1; j < data.m(); ++j)
        out.X.col(j) = (data.X.col(j) - x_mean(j)) / x_sd(j);
    return out;
}

void write_coefficients_csv(const std::string& path, const Dataset& data,
                            const FitResult& fit)
{
    std::ofstream out = open_output(path);
    out << "id,u,v,y,fitted,residual";
    for (const auto& name : data.names)
        out << ",beta_" << name << ",se_" << name << ",t_" << name;
    out << "\n";
    for (arma::uword i = 0; i < data.n(); ++i) {
        out << i << ',' << format_double(data.coords(i, 0)) << ','
            << format_double(data.coords(i, 1)) << ','
            << format_double(data.y(i)) << ',' << format_double(fit.fitted(i))
            << ',' << format_double(fit.residuals(i));
        for (arma::uword j = 0; j < data.m(); ++j)
            out << ',' << format_double(fit.beta(i, j)) << ','
                << format_double(fit.se(i, j)) << ','
                << format_double(fit.t_values(i, j));
        out << "\n";
    }
}

namespace {

nlohmann::json json_number(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;  // JSON has no NaN/inf
}

double round_to(double v, int digits)
{
    if (!std::isfinite(v)) return v;
    const double p = std::pow(10.0, digits);
    return std::round(v * p) / p;
}

} // namespace

void write_summary_json(const std::string& path, const FitResult& fit,
                        const MoranResult& moran, const Standardizer& std_state,
                        const std::vector<std::string>& names)
{
    nlohmann::json j;
    j["model"] = fit.model;
    j["n"] = fit.fitted.n_elem;
    j["m"] = names.size();
    j["criterion"] = fit.criterion;
    j["criterion_value"] = json_number(fit.criterion_value);
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["enp_model"] = json_number(fit.enp_model);
    j["sigma2_hat"] = json_number(fit.sigma2_hat);

    nlohmann::json scales = nlohmann::json::array();
    for (std::size_t k = 0; k < names.size(); ++k) {
        nlohmann::json row;
        row["covariate"] = names[k];
        row["bandwidth"] = fit.scales.bandwidth[k];
        row["alpha"] = fit.scales.alpha[k];
        row["enp"] = json_number(fit.enp_per_covariate(k));
        scales.push_back(row);
    }
    j["scales"] = scales;

    j["diagnostics"] = {{"adj_r2", json_number(fit.diagnostics.adj_r2)},
                        {"aicc", json_number(fit.diagnostics.aicc)},
                        {"rss", json_number(fit.diagnostics.rss)},
                        {"mae", json_number(fit.diagnostics.mae)},
                        {"rmse", json_number(fit.diagnostics.rmse)}};

    nlohmann::json mo;
    mo["I"] = json_number(moran.I);
    mo["expected"] = json_number(moran.expected);
    mo["z"] = json_number(moran.z);
    mo["p_value"] = json_number(moran.p_value);
    mo["p_permutation"] =
        moran.p_permutation ? json_number(*moran.p_permutation)
                            : nlohmann::json(nullptr);
    j["moran"] = mo;

    nlohmann::json st;
    st["on"] = std_state.on;
    if (std_state.on) {
        st["y_mean"] = std_state.y_mean;
        st["y_sd"] = std_state.y_sd;
        st["x_mean"] = std::vector<double>(std_state.x_mean.begin(),
                                           std_state.x_mean.end());
        st["x_sd"] = std::vector<double>(std_state.x_sd.begin(),
                                         std_state.x_sd.end());
    }
    j["standardization"] = st;

    // Rounded convenience block; every machine-readable number above keeps
    // full precision.
    nlohmann::json hr;
    hr["adj_r2"] = round_to(fit.diagnostics.adj_r2, 3);
    hr["aicc"] = round_to(fit.diagnostics.aicc, 3);
    hr["rmse"] = round_to(fit.diagnostics.rmse, 3);
    hr["moran_i"] = round_to(moran.I, 3);
    hr["enp"] = round_to(fit.enp_model, 2);
    j["human_readable"] = hr;

    std::ofstream out = open_output(path);
    out << j.dump(2) << "\n";
}

void write_trace_csv(const std::string& path, const SearchTrace& trace)
{
    std::ofstream out = open_output(path);
    out << "covariate,bandwidth,alpha,criterion,iteration\n";
    SearchTrace sorted = trace;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const SearchStep& a, const SearchStep& b) {
                         if (a.covariate != b.covariate)
                             return a.covariate < b.covariate;
                         return a.iteration < b.iteration;
                     });
    for (const auto& s : sorted)
        out << s.covariate << ',' << s.bandwidth << ','
            << format_double(s.alpha) << ',' << format_double(s.criterion)
            << ',' << s.iteration << "\n";
}

void write_compare_csv(const std::string& path,
                       const std::vector<CompareRow>& rows)
{
    std::ofstream out = open_output(path);
    out << "model,adj_r2,aicc,rss,mae,rmse\n";
    for (const auto& r : rows)
        out << r.model << ',' << format_double(r.metrics.adj_r2) << ','
            << format_double(r.metrics.aicc) << ','
            << format_double(r.metrics.rss) << ','
            << format_double(r.metrics.mae) << ','
            << format_double(r.metrics.rmse) << "\n";
}

void write_scales_csv(const std::string& path,
                      const std::vector<FitResult>& fits,
                      const std::vector<std::string>& names)
{
    std::ofstream out = open_output(path);
    out << "model,covariate,bandwidth,alpha,enp\n";
    for (const auto& f : fits)
        for (std::size_t k = 0; k < names.size(); ++k)
            out << f.model << ',' << names[k] << ',' << f.scales.bandwidth[k]
                << ',' << format_double(f.scales.alpha[k]) << ','
                << format_double(f.enp_per_covariate(k)) << "\n";
}

void write_simulated(const std::string& stem, const SimulatedDataset& sim)
{
    const Dataset& d = sim.dataset;
    {
        std::ofstream out = open_output(stem + ".csv");
        out << "id,u,v,y";
        for (arma::uword j = 1; j < d.m(); ++j) out << ',' << d.names[j];
        out << "\n";
        for (arma::uword i = 0; i < d.n(); ++i) {
            out << i << ',' << format_double(d.coords(i, 0)) << ','
                << format_double(d.coords(i, 1)) << ','
                << format_double(d.y(i));
            for (arma::uword j = 1; j < d.m(); ++j)
                out << ',' << format_double(d.X(i, j));
            out << "\n";
        }
    }
    {
        std::ofstream out = open_output(stem + ".true_beta.csv");
        out << "id";
        for (const auto& name : d.names) out << ",beta_" << name;
        out << "\n";
        for (arma::uword i = 0; i < d.n(); ++i) {
            out << i;
            for (arma::uword j = 0; j < d.m(); ++j)
                out << ',' << format_double(sim.true_beta(i, j));
            out << "\n";
        }
    }
    {
        nlohmann::json j;
        j["scenario"] = sim.scenario;
        j["seed"] = sim.seed;
        j["grid_side"] = sim.grid_side;
        j["n"] = d.n();
        std::ofstream out = open_output(stem + ".meta.json");
        out << j.dump(2) << "\n";
    }
}

bool has_simulation_sidecar(const std::string& csv_path)
{
    std::filesystem::path p(csv_path);
    if (p.extension() != ".csv") return false;
    p.replace_extension("");
    p += ".true_beta.csv";
    return std::filesystem::exists(p);
}

} // namespace msgwr
