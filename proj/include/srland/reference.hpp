#pragma once

// Plain serial reference implementations. Everything here favors the most
// literal formulation over speed; the test suites hold the production
// kernels to these outputs, and the kernel benchmark times one against the
// other.

#include <cstdint>
#include <vector>

#include "srland/density.hpp"
#include "srland/graph.hpp"
#include "srland/image.hpp"
#include "srland/knn.hpp"
#include "srland/matrix.hpp"

namespace srland::ref {

// O(n^2) exact nearest neighbors by full sort on (distance, index).
NeighborTable brute_knn(const double* data, std::int64_t n, std::int64_t dim, int k);

// rho as literally defined: min distance to a >=-density point (max distance
// anywhere, for the argmax), before normalization.
std::vector<double> brute_rho_raw(const RowMatrix& e, const std::vector<double>& p);

// Bandwidth rule recomputed with a plain double loop.
double brute_bandwidth(const double* data, std::int64_t n, std::int64_t dim, int k);

// Normalized KDE computed from scratch (own neighbor search, plain sums).
std::vector<double> brute_kde(const double* data, std::int64_t n, std::int64_t dim, int k,
                              double sigma0);

// |d(m1, x) - d(m2, x)| from a full point-to-mode distance table.
std::vector<double> brute_boundary(const RowMatrix& e, const std::vector<std::int32_t>& modes);

// All pixels within Euclidean grid distance r of i, by scanning every pixel.
std::vector<std::int32_t> brute_ball(const GridShape& grid, std::int64_t i, double r);

// Dense eigendecomposition of the symmetrized walk operator; returns the
// m largest-|lambda| pairs with eigenvectors scaled like the production path
// (stationary-normalized, sign-fixed).
struct DensePairs {
    std::vector<double> eigenvalues;
    RowMatrix psi;  // n x m
};
DensePairs dense_eigenpairs(const MarkovChain& chain, int m);

// Dense t-step transition row (for walking the exact distance by hand).
std::vector<double> dense_transition_row(const MarkovChain& chain, std::int64_t t, std::int64_t i);

// Metrics recomputed from a dense confusion matrix built with index maps.
struct BruteMetrics {
    double oa = 0, aa = 0, kappa = 0;
};
BruteMetrics brute_metrics(const std::vector<std::int32_t>& predicted, const GroundTruth& truth);

// Serial twins of the parallel kernels, for the benchmark tool.
void serial_spmv(const MarkovChain& chain, const double* x, double* y);
std::vector<double> serial_kde_raw(const NeighborTable& table, double sigma0);

}  // namespace srland::ref
