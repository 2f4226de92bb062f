#ifndef MSGWR_TYPES_H
#define MSGWR_TYPES_H

#include <armadillo>
#include <optional>
#include <string>
#include <vector>

namespace msgwr {

// Observations: planar coordinates, response, design matrix with a leading
// column of ones for the intercept.
struct Dataset {
    arma::mat coords;                 // n x 2, (u, v) per row
    arma::vec y;                      // n
    arma::mat X;                      // n x m, column 0 = intercept
    std::vector<std::string> names;   // m labels, names[0] = "intercept"

    arma::uword n() const { return y.n_elem; }
    arma::uword m() const { return X.n_cols; }
};

// Per-covariate spatial scale: neighbor-count bandwidth and the mix between
// geographic and attribute weighting (alpha = 1 is purely geographic).
struct ScaleConfig {
    std::vector<int> bandwidth;       // m entries
    std::vector<double> alpha;        // m entries
};

// Optional per-covariate pins. A pinned value is excluded from search.
struct Pins {
    std::vector<std::optional<int>> bandwidth;
    std::vector<std::optional<double>> alpha;

    bool empty() const { return bandwidth.empty() && alpha.empty(); }
};

// One record of the (bandwidth, alpha) search. covariate = -1 marks a
// model-wide search (single-bandwidth models).
struct SearchStep {
    int covariate;
    int bandwidth;
    double alpha;
    double criterion;
    int iteration;
};
using SearchTrace = std::vector<SearchStep>;

struct MetricBundle {
    double adj_r2 = 0.0;
    double aicc = 0.0;
    double rss = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
};

struct MoranResult {
    double I = 0.0;
    double expected = 0.0;            // -1/(n-1)
    double z = 0.0;
    double p_value = 1.0;
    std::optional<double> p_permutation;
};

struct FitResult {
    std::string model;                // ols | gwr | sgwr | mgwr | msgwr
    arma::mat beta;                   // n x m
    arma::mat se;                     // n x m
    arma::mat t_values;               // n x m
    arma::vec fitted;                 // n
    arma::vec residuals;              // n
    arma::vec enp_per_covariate;      // m
    double enp_model = 0.0;
    double sigma2_hat = 0.0;          // residual variance, RSS / (n - tr(S))
    ScaleConfig scales;
    MetricBundle diagnostics;
    SearchTrace trace;
    std::string criterion;            // aicc | cv
    double criterion_value = 0.0;
    bool converged = true;
    int iterations = 0;
};

enum class Criterion { AICc, CV };
enum class AlphaSearchKind { DnC, Greedy };
enum class SocKind { Coef, Rss };
enum class MsgwrMode { MGWR, MSGWR };

struct FitOptions {
    Criterion criterion = Criterion::AICc;
    AlphaSearchKind alpha_search = AlphaSearchKind::DnC;
    MsgwrMode mode = MsgwrMode::MSGWR;
    double phi = 1e-5;
    SocKind soc = SocKind::Coef;
    int max_iters = 200;
    Pins pins;
    double rho = 1e-5;                // similarity SD floor
    double dnc_epsilon = 0.005;
    std::vector<double> greedy_seeds = {0.0, 0.25, 0.5, 0.75, 1.0};
    double greedy_step = 0.05;
    bool ridge_fallback = false;
    int threads = 0;                  // 0 = library default
};

} // namespace msgwr

#endif
