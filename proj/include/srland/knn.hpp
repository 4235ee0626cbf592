#pragma once

#include <cstdint>
#include <vector>

namespace srland {

// Exact k-nearest-neighbor table: for each of n points, the k nearest other
// points by Euclidean distance, ascending, ties broken by lower index. dist2
// holds squared distances computed by row_distance2 so every consumer (and
// every oracle) sees bitwise-identical values.
struct NeighborTable {
    std::int64_t n = 0;
    int k = 0;
    std::vector<std::int32_t> idx;    // n * k
    std::vector<double> dist2;        // n * k

    const std::int32_t* neighbors(std::int64_t i) const { return idx.data() + i * k; }
    const double* distances2(std::int64_t i) const { return dist2.data() + i * k; }
};

// Builds the full table. Low-dimensional data goes through a kd-tree;
// otherwise a parallel linear scan. Both strategies produce the identical
// table (the (dist2, index) order has a unique answer).
NeighborTable knn_exact(const double* data, std::int64_t n, std::int64_t dim, int k);

// Single exact query against the same data, excluding `exclude` (pass -1 to
// keep all points). Returned indices are ranked by (dist2, index).
std::vector<std::int32_t> knn_query(const double* data, std::int64_t n, std::int64_t dim,
                                    const double* query, int k, std::int64_t exclude);

}  // namespace srland
