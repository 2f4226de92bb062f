#include "msgwr/simulation.h"

#include <cmath>
#include <random>

#include "msgwr/errors.h"

namespace msgwr {

namespace {

// splitmix64 finalizer: small consecutive seeds land on decorrelated
// mt19937_64 states, and each scenario draws from its own substream.
std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Deterministic draws on top of mt19937_64. std::normal_distribution's
// algorithm is implementation-defined, so normals use an explicit
// Box-Muller transform: bit-identical datasets for a given seed regardless
// of the standard library.
struct Rng {
    std::mt19937_64 eng;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : eng(mix64(seed + 0x9E3779B97F4A7C15ULL * stream)) {}

    double uniform()  // [0, 1)
    {
        return static_cast<double>(eng() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal()
    {
        const double u1 = 1.0 - uniform();  // (0, 1]: keeps the log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * arma::datum::pi * u2);
    }
    arma::vec normals(arma::uword n)
    {
        arma::vec v(n);
        for (arma::uword i = 0; i < n; ++i) v(i) = normal();
        return v;
    }
    arma::uword index(arma::uword n)  // uniform in [0, n)
    {
        // Rejection sampling keeps the draw unbiased and deterministic.
        const std::uint64_t span = n;
        const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % span);
        for (;;) {
            const std::uint64_t r = eng();
            if (r < limit) return static_cast<arma::uword>(r % span);
        }
    }
};

arma::vec standardized(arma::vec v)
{
    const double mean = arma::mean(v);
    const double sd = arma::stddev(v, 1);  // population
    if (sd == 0.0)
        throw numeric_error("degenerate field: zero variance");
    return (v - mean) / sd;
}

// Smooth spatial surface: a handful of Gaussian bumps with random centers,
// widths, and signed amplitudes, standardized to mean 0 / variance 1.
arma::vec smooth_field(Rng& rng, const arma::vec& u, const arma::vec& v)
{
    constexpr int n_bumps = 5;
    arma::vec f(u.n_elem, arma::fill::zeros);
    for (int b = 0; b < n_bumps; ++b) {
        const double cu = rng.uniform();
        const double cv = rng.uniform();
        const double width = rng.uniform(0.07, 0.15);
        const double mag = rng.uniform(0.5, 1.5);
        const double amp = rng.uniform() < 0.5 ? mag : -mag;
        const double denom = 2.0 * width * width;
        for (arma::uword i = 0; i < u.n_elem; ++i) {
            const double du = u(i) - cu;
            const double dv = v(i) - cv;
            f(i) += amp * std::exp(-(du * du + dv * dv) / denom);
        }
    }
    return standardized(f);
}

// Fragmented contextual surface: k-means (k = 4) on auxiliary iid normal
// features; every cluster gets one N(0,1) regime value; standardized.
arma::vec contextual_field(Rng& rng, arma::uword n)
{
    constexpr arma::uword k = 4;
    constexpr int lloyd_iters = 25;

    arma::mat feats(n, 3);
    for (arma::uword i = 0; i < n; ++i)
        for (arma::uword j = 0; j < 3; ++j) feats(i, j) = rng.normal();

    arma::mat centers(k, 3);
    std::vector<arma::uword> chosen;
    while (chosen.size() < k) {
        const arma::uword cand = rng.index(n);
        bool dup = false;
        for (arma::uword c : chosen) dup = dup || c == cand;
        if (!dup) chosen.push_back(cand);
    }
    for (arma::uword c = 0; c < k; ++c) centers.row(c) = feats.row(chosen[c]);

    arma::uvec label(n, arma::fill::zeros);
    for (int it = 0; it < lloyd_iters; ++it) {
        for (arma::uword i = 0; i < n; ++i) {
            double best = arma::datum::inf;
            for (arma::uword c = 0; c < k; ++c) {
                const double d2 = arma::accu(arma::square(feats.row(i) - centers.row(c)));
                if (d2 < best) {
                    best = d2;
                    label(i) = c;
                }
            }
        }
        for (arma::uword c = 0; c < k; ++c) {
            const arma::uvec members = arma::find(label == c);
            if (!members.is_empty())
                centers.row(c) = arma::mean(feats.rows(members), 0);
        }
    }

    arma::vec regime(k);
    for (arma::uword c = 0; c < k; ++c) regime(c) = rng.normal();
    arma::vec out(n);
    for (arma::uword i = 0; i < n; ++i) out(i) = regime(label(i));
    return standardized(out);
}

// Scenario stream tags (see Rng): fixed constants so the same user seed
// yields independent draws in the two generators.
constexpr std::uint64_t kPureGeoStream = 9;
constexpr std::uint64_t kMixedStream = 2;

arma::mat unit_grid(int grid_side)
{
    if (grid_side < 5)
        throw parameter_error("grid_side must be at least 5");
    const arma::uword n = static_cast<arma::uword>(grid_side) * grid_side;
    arma::mat coords(n, 2);
    const double denom = static_cast<double>(grid_side - 1);
    arma::uword at = 0;
    for (int r = 0; r < grid_side; ++r)
        for (int c = 0; c < grid_side; ++c, ++at) {
            coords(at, 0) = static_cast<double>(c) / denom;  // u
            coords(at, 1) = static_cast<double>(r) / denom;  // v
        }
    return coords;
}

void assemble_response(SimulatedDataset& sim, Rng& rng, double noise_sd)
{
    const arma::uword n = sim.dataset.X.n_rows;
    arma::vec y = arma::sum(sim.true_beta % sim.dataset.X, 1);
    for (arma::uword i = 0; i < n; ++i) y(i) += noise_sd * rng.normal();
    sim.dataset.y = std::move(y);
}

} // namespace

SimulatedDataset gen_pure_geographic(std::uint64_t seed, int grid_side,
                                     double noise_sd)
{
    Rng rng(seed, kPureGeoStream);
    SimulatedDataset sim;
    sim.seed = seed;
    sim.scenario = "pure_geo";
    sim.grid_side = grid_side;

    sim.dataset.coords = unit_grid(grid_side);
    const arma::vec u = sim.dataset.coords.col(0);
    const arma::vec v = sim.dataset.coords.col(1);
    const arma::uword n = u.n_elem;
    constexpr arma::uword m = 3;

    sim.g_fields.zeros(n, m);
    sim.c_fields.zeros(n, m);
    sim.g_fields.col(0) = smooth_field(rng, u, v);
    sim.g_fields.col(1) = smooth_field(rng, u, v);

    sim.true_beta.set_size(n, m);
    sim.true_beta.col(0) = 1.0 + 0.8 * sim.g_fields.col(0);
    sim.true_beta.col(1) = 1.0 + sim.g_fields.col(1);
    sim.true_beta.col(2) = 1.0 + (u + (2.0 + v));

    // Predictors: weak spatial correlation plus dominant iid noise, so
    // attribute similarity carries no information about the surfaces.
    sim.dataset.X.set_size(n, m);
    sim.dataset.X.col(0).ones();
    sim.dataset.X.col(1) = 0.3 * smooth_field(rng, u, v) + 1.2 * rng.normals(n);
    sim.dataset.X.col(2) = 0.3 * smooth_field(rng, u, v) + 1.2 * rng.normals(n);
    sim.dataset.names = {"intercept", "x1", "x2"};

    assemble_response(sim, rng, noise_sd);
    return sim;
}

SimulatedDataset gen_mixed_effects(std::uint64_t seed, int grid_side,
                                   double noise_sd, const std::vector<double>& s)
{
    Rng rng(seed, kMixedStream);
    SimulatedDataset sim;
    sim.seed = seed;
    sim.scenario = "mixed";
    sim.grid_side = grid_side;

    sim.dataset.coords = unit_grid(grid_side);
    const arma::vec u = sim.dataset.coords.col(0);
    const arma::vec v = sim.dataset.coords.col(1);
    const arma::uword n = u.n_elem;
    constexpr arma::uword m = 5;

    std::vector<double> sj = s.empty() ? std::vector<double>(m, 1.0) : s;
    if (sj.size() != m)
        throw parameter_error("mixed scenario expects 5 scale factors");

    sim.g_fields.zeros(n, m);
    sim.c_fields.zeros(n, m);
    sim.true_beta.set_size(n, m);

    sim.g_fields.col(0) = smooth_field(rng, u, v);
    sim.true_beta.col(0) = 1.0 + 0.8 * sim.g_fields.col(0);
    sim.g_fields.col(1) = smooth_field(rng, u, v);
    sim.true_beta.col(1) = 1.0 + sim.g_fields.col(1);
    for (arma::uword j = 2; j < m; ++j) {
        sim.g_fields.col(j) = smooth_field(rng, u, v);
        sim.c_fields.col(j) = contextual_field(rng, n);
        sim.true_beta.col(j) =
            1.0 + sj[j] * (sim.g_fields.col(j) + sim.c_fields.col(j));
    }

    // x1 is noise-dominated; x2..x4 carry their contextual score so that
    // attribute similarity predicts coefficient similarity.
    sim.dataset.X.set_size(n, m);
    sim.dataset.X.col(0).ones();
    sim.dataset.X.col(1) = 0.3 * smooth_field(rng, u, v) + 1.2 * rng.normals(n);
    for (arma::uword j = 2; j < m; ++j)
        sim.dataset.X.col(j) = 0.3 * smooth_field(rng, u, v) +
                               0.9 * sim.c_fields.col(j) + 0.6 * rng.normals(n);
    sim.dataset.names = {"intercept", "x1", "x2", "x3", "x4"};

    assemble_response(sim, rng, noise_sd);
    return sim;
}

RecoveryScore score_recovery(const arma::mat& true_beta,
                             const arma::mat& estimated_beta)
{
    if (true_beta.n_rows != estimated_beta.n_rows ||
        true_beta.n_cols != estimated_beta.n_cols)
        throw input_error("score_recovery: shape mismatch");

    const arma::uword m = true_beta.n_cols;
    RecoveryScore rs;
    rs.rmse.set_size(m);
    rs.pearson.resize(m);
    for (arma::uword j = 0; j < m; ++j) {
        const arma::vec diff = estimated_beta.col(j) - true_beta.col(j);
        rs.rmse(j) = std::sqrt(arma::dot(diff, diff) /
                               static_cast<double>(diff.n_elem));
        const double sd_t = arma::stddev(true_beta.col(j), 1);
        const double sd_e = arma::stddev(estimated_beta.col(j), 1);
        if (sd_t == 0.0 || sd_e == 0.0) {
            rs.pearson[j] = std::nullopt;  // undefined, reported as absent
        } else {
            const arma::vec ct = true_beta.col(j) - arma::mean(true_beta.col(j));
            const arma::vec ce = estimated_beta.col(j) - arma::mean(estimated_beta.col(j));
            rs.pearson[j] = arma::dot(ct, ce) /
                            (static_cast<double>(ct.n_elem) * sd_t * sd_e);
        }
    }
    return rs;
}

} // namespace msgwr
