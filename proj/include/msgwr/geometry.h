#ifndef MSGWR_GEOMETRY_H
#define MSGWR_GEOMETRY_H

#include <armadillo>

namespace msgwr {

// Full Euclidean distance table; symmetric, zero diagonal.
// Throws input_error on non-finite coordinates (names the offending row).
arma::mat pairwise_distances(const arma::mat& coords);

// Distance from point i (whose full distance row is `row`, including the
// zero self-distance) to its k-th nearest other point. k >= n-1 returns the
// maximum distance (only n-1 neighbor distances exist).
// Throws parameter_error unless 2 <= k <= n.
double adaptive_bandwidth_distance(const arma::vec& row, int k);

// Row-wise ascending sort of a distance table; column 0 is the self
// distance 0, column k is the k-th nearest-neighbor distance. Precomputed
// once so bandwidth candidates become O(1) radius lookups.
arma::mat sorted_distance_rows(const arma::mat& d);

} // namespace msgwr

#endif
