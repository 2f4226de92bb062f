#include "msgwr/geometry.h"

#include <algorithm>
#include <cmath>

#include "msgwr/errors.h"

namespace msgwr {

arma::mat pairwise_distances(const arma::mat& coords)
{
    const arma::uword n = coords.n_rows;
    if (coords.n_cols != 2)
        throw input_error("coordinates must have two columns (u, v)");
    for (arma::uword i = 0; i < n; ++i)
        if (!coords.row(i).is_finite())
            throw input_error("non-finite coordinate at row " + std::to_string(i));

    arma::mat d(n, n, arma::fill::zeros);
    for (arma::uword i = 0; i < n; ++i) {
        for (arma::uword l = i + 1; l < n; ++l) {
            const double du = coords(i, 0) - coords(l, 0);
            const double dv = coords(i, 1) - coords(l, 1);
            const double dist = std::sqrt(du * du + dv * dv);
            d(i, l) = dist;
            d(l, i) = dist;
        }
    }
    return d;
}

double adaptive_bandwidth_distance(const arma::vec& row, int k)
{
    const int n = static_cast<int>(row.n_elem);
    if (k < 2 || k > n)
        throw parameter_error("neighbor count k = " + std::to_string(k) +
                              " outside [2, " + std::to_string(n) + "]");
    arma::vec sorted = arma::sort(row);
    // sorted[0] is the self distance 0; entry k is the k-th nearest other
    // point. Only n-1 neighbor distances exist, so k = n clamps to the max.
    const int idx = std::min(k, n - 1);
    return sorted(idx);
}

arma::mat sorted_distance_rows(const arma::mat& d)
{
    arma::mat out(d.n_rows, d.n_cols);
    for (arma::uword i = 0; i < d.n_rows; ++i)
        out.row(i) = arma::sort(d.row(i));
    return out;
}

} // namespace msgwr
