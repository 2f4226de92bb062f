#include "msgwr/weights.h"

#include <cmath>

#include "msgwr/errors.h"

namespace msgwr {

arma::vec geographic_weights(const arma::vec& d_row, double radius)
{
    if (!(radius > 0.0))
        throw parameter_error("kernel radius must be positive");
    arma::vec w(d_row.n_elem, arma::fill::zeros);
    for (arma::uword l = 0; l < d_row.n_elem; ++l) {
        if (d_row(l) < radius) {
            const double t = d_row(l) / radius;
            const double u = 1.0 - t * t;
            w(l) = u * u;
        }
    }
    return w;
}

arma::vec attribute_weights(const arma::vec& x, arma::uword i,
                            const arma::uvec& neighborhood, double rho)
{
    if (neighborhood.is_empty())
        throw calibration_error("empty neighborhood at point " + std::to_string(i) +
                                " (bandwidth too small)");
    // Population standard deviation over the neighborhood, i included.
    double s1 = 0.0, s2 = 0.0;
    for (arma::uword idx : neighborhood) {
        s1 += x(idx);
        s2 += x(idx) * x(idx);
    }
    const double cnt = static_cast<double>(neighborhood.n_elem);
    const double mean = s1 / cnt;
    double var = s2 / cnt - mean * mean;
    if (var < 0.0) var = 0.0;
    double sd = std::sqrt(var);
    if (sd == 0.0) sd = rho;

    const double log_half = std::log(0.5);
    arma::vec w(x.n_elem, arma::fill::zeros);
    for (arma::uword idx : neighborhood) {
        const double z = (x(idx) - x(i)) / sd;
        w(idx) = std::exp(log_half * z * z);
    }
    return w;
}

arma::vec combine_weights(const arma::vec& w_geo, const arma::vec& w_attr,
                          double alpha)
{
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw parameter_error("alpha must lie in [0,1]");
    if (w_geo.n_elem != w_attr.n_elem)
        throw parameter_error("weight vectors differ in length");
    if (alpha == 1.0) return w_geo;
    if (alpha == 0.0) return w_attr;
    return alpha * w_geo + (1.0 - alpha) * w_attr;
}

} // namespace msgwr
