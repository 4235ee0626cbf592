#pragma once

// Shared scaffolding for the test suites: small random scenes, hand-built
// graphs, and scratch directories.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "srland/graph.hpp"
#include "srland/image.hpp"
#include "srland/rng.hpp"

namespace testutil {

// Uniform random cube with values in [0, scale); every value distinct with
// probability 1, so default bandwidths are never degenerate.
inline srland::ImageCube random_cube(std::int64_t rows, std::int64_t cols, std::int64_t bands,
                                     std::uint64_t seed, double scale = 1.0) {
    srland::ImageCube cube;
    cube.rows = rows;
    cube.cols = cols;
    cube.bands = bands;
    cube.values.resize(static_cast<std::size_t>(rows * cols * bands));
    srland::Rng rng(srland::derive_seed(seed, 77));
    for (double& v : cube.values) v = scale * rng.uniform01();
    return cube;
}

inline srland::MarkovChain random_chain(std::int64_t rows, std::int64_t cols, std::int64_t bands,
                                        std::uint64_t seed, double r = 1.5) {
    srland::ImageCube cube = random_cube(rows, cols, bands, seed);
    return srland::to_markov(srland::build_spatial_affinity(cube, r));
}

// Fresh scratch directory under the build tree.
inline std::string scratch_dir(const std::string& tag) {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("srland_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

// Hand-built affinity matrix from a dense symmetric weight array.
inline srland::SparseAffinity dense_affinity(const std::vector<std::vector<double>>& w) {
    srland::SparseAffinity a;
    a.n = static_cast<std::int64_t>(w.size());
    a.row_ptr.assign(1, 0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (std::size_t j = 0; j < w.size(); ++j) {
            if (w[i][j] != 0.0) {
                a.col.push_back(static_cast<std::int32_t>(j));
                a.val.push_back(w[i][j]);
            }
        }
        a.row_ptr.push_back(static_cast<std::int64_t>(a.col.size()));
    }
    return a;
}

}  // namespace testutil
