#pragma once

#include <cstdint>

#include "srland/image.hpp"
#include "srland/knn.hpp"

namespace srland {

// Normalized kernel density estimate over each point's spectral neighbors.
struct DensityProfile {
    std::vector<double> p;   // sums to 1
    double bandwidth = 0;    // sigma_0 actually used
    int k = 0;               // neighbors per point
};

// Exact k nearest neighbors in the spectral (band) domain, self excluded,
// ties by lower index.
NeighborTable spectral_knn(const ImageCube& cube, int k);

// Bandwidth rule: half the mean distance over all n*k (point, neighbor) pairs.
double adaptive_bandwidth(const NeighborTable& table);

// p~(i) = sum over i's neighbors of exp(-d^2 / sigma0^2), normalized to sum 1.
DensityProfile kde(const ImageCube& cube, const NeighborTable& table, double sigma0);

}  // namespace srland
