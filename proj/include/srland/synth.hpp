#pragma once

#include <cstdint>

#include "srland/image.hpp"

namespace srland {

// Adds i.i.d. Gaussian perturbations of the given variance to every value.
// Used as preprocessing to break exact duplicates before graph construction;
// variance 0 returns the input unchanged.
ImageCube inject_noise(const ImageCube& cube, double variance, std::uint64_t seed);

struct SyntheticScene {
    ImageCube cube;
    GroundTruth truth;
};

// Desk-scale labeled scenes: the grid is partitioned into `classes` regions
// grown from `smoothness` random seed pixels per class (regions are
// 4-connected when smoothness == 1), and each pixel's spectrum is its class
// mean plus unit-variance Gaussian noise. Class means are placed pairwise at
// Euclidean distance >= separation.
SyntheticScene synthesize_scene(std::int64_t rows, std::int64_t cols, std::int64_t bands,
                                int classes, double separation, int smoothness,
                                std::uint64_t seed);

}  // namespace srland
