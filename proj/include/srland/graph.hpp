#pragma once

#include <cstdint>
#include <vector>

#include "srland/image.hpp"

namespace srland {

// Symmetric nonnegative affinity matrix in CSR form. Entries are Gaussian
// kernel weights exp(-||x_i - x_j||^2 / sigma^2) in (0, 1]; self-loops carry
// weight 1 (they keep the random walk aperiodic). Exactly one of
// spatial_radius / spectral_neighbors is set depending on the build mode.
struct SparseAffinity {
    std::int64_t n = 0;
    std::vector<std::int64_t> row_ptr;   // n + 1
    std::vector<std::int32_t> col;       // ascending within each row
    std::vector<double> val;
    double sigma = 0;                    // bandwidth actually used
    double spatial_radius = 0;           // > 0 when built spatially
    int spectral_neighbors = 0;          // k_g when built from spectral kNN

    std::int64_t nnz() const { return static_cast<std::int64_t>(col.size()); }
};

// Row-stochastic random walk derived from an affinity matrix, with its
// degrees and stationary distribution. Construction fails on disconnected
// graphs rather than silently patching them.
struct MarkovChain {
    std::int64_t n = 0;
    std::vector<std::int64_t> row_ptr;
    std::vector<std::int32_t> col;
    std::vector<double> transition;      // P_ij = W_ij / d_i
    std::vector<double> degree;          // d_i = sum_j W_ij
    std::vector<double> stationary;      // pi_i = d_i / sum(d)
};

// Indices of all pixels whose grid coordinates lie within Euclidean distance
// r of pixel i's coordinates, i itself included, ascending.
std::vector<std::int32_t> spatial_ball(const GridShape& grid, std::int64_t i, double r);

// Spatially restricted graph: an edge (i, j) exists iff the pixels are
// within spatial distance r, weighted by the Gaussian kernel on their
// spectra. sigma == 0 selects the data-driven default: the mean spectral
// distance over all retained off-diagonal edges.
SparseAffinity build_spatial_affinity(const ImageCube& cube, double r, double sigma = 0);

// Ablation graph: symmetrized union of each point's k_g exact spectral
// nearest neighbors (plus self-loops), same kernel and sigma rule.
SparseAffinity build_spectral_affinity(const ImageCube& cube, int k_g, double sigma = 0);

MarkovChain to_markov(const SparseAffinity& w);

// y = P x (parallel over rows).
void markov_apply(const MarkovChain& chain, const double* x, double* y);

}  // namespace srland
