#include "srland/synth.hpp"

#include <cmath>
#include <functional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "srland/errors.hpp"
#include "srland/rng.hpp"

namespace srland {

ImageCube inject_noise(const ImageCube& cube, double variance, std::uint64_t seed) {
    if (variance < 0)
        throw usage_error("noise variance must be nonnegative, got " + std::to_string(variance));
    if (variance == 0) return cube;
    ImageCube out = cube;
    Rng rng(seed);
    const double scale = std::sqrt(variance);
    for (auto& v : out.values) v += scale * rng.gaussian();
    return out;
}

SyntheticScene synthesize_scene(std::int64_t rows, std::int64_t cols, std::int64_t bands,
                                int classes, double separation, int smoothness,
                                std::uint64_t seed) {
    if (rows <= 0 || cols <= 0 || bands <= 0)
        throw usage_error("scene dimensions must be positive");
    if (classes < 2) throw usage_error("a scene needs at least 2 classes");
    if (separation <= 0) throw usage_error("class separation must be positive");
    if (smoothness < 1) throw usage_error("smoothness must be >= 1");
    const std::int64_t n = rows * cols;
    if (static_cast<std::int64_t>(classes) * smoothness > n)
        throw usage_error("more region seeds than pixels");

    Rng rng(seed);
    GridShape grid{rows, cols};

    // Distinct region-seed pixels; seed s belongs to class s / smoothness.
    const int total_seeds = classes * smoothness;
    std::vector<std::int64_t> seed_pixels;
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    while (static_cast<int>(seed_pixels.size()) < total_seeds) {
        std::int64_t p = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n)));
        if (taken[static_cast<std::size_t>(p)]) continue;
        taken[static_cast<std::size_t>(p)] = 1;
        seed_pixels.push_back(p);
    }

    // Regions grow from their seeds through 4-adjacency in order of Euclidean
    // distance to the seed (integer d^2 keys, so ties are exact and broken by
    // pixel then seed index). Growing through adjacency keeps every region
    // connected; the Euclidean ordering makes boundaries straight bisectors
    // instead of the taxicab wedges a plain BFS would carve.
    std::vector<std::int32_t> region(static_cast<std::size_t>(n), -1);
    using Entry = std::tuple<std::int64_t, std::int64_t, std::int32_t>;  // (d2, pixel, seed#)
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
    for (int s = 0; s < total_seeds; ++s) frontier.emplace(0, seed_pixels[s], s);
    const std::int64_t dr[4] = {-1, 1, 0, 0};
    const std::int64_t dc[4] = {0, 0, -1, 1};
    while (!frontier.empty()) {
        auto [d2, i, s] = frontier.top();
        frontier.pop();
        if (region[static_cast<std::size_t>(i)] >= 0) continue;
        region[static_cast<std::size_t>(i)] = s / smoothness;
        std::int64_t r = grid.row_of(i), c = grid.col_of(i);
        std::int64_t sr = grid.row_of(seed_pixels[s]), sc = grid.col_of(seed_pixels[s]);
        for (int d = 0; d < 4; ++d) {
            std::int64_t rr = r + dr[d], cc = c + dc[d];
            if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
            std::int64_t j = grid.flat_index(rr, cc);
            if (region[static_cast<std::size_t>(j)] >= 0) continue;
            frontier.emplace((rr - sr) * (rr - sr) + (cc - sc) * (cc - sc), j, s);
        }
    }

    // Class means on a line along a random unit direction: mean_c = c * sep * u,
    // so pairwise distances are |a - b| * sep >= sep.
    std::vector<double> direction(static_cast<std::size_t>(bands));
    double norm2 = 0;
    do {
        norm2 = 0;
        for (auto& v : direction) {
            v = rng.gaussian();
            norm2 += v * v;
        }
    } while (norm2 == 0);
    const double inv_norm = 1.0 / std::sqrt(norm2);
    for (auto& v : direction) v *= inv_norm;

    SyntheticScene scene;
    scene.cube.rows = rows;
    scene.cube.cols = cols;
    scene.cube.bands = bands;
    scene.cube.values.resize(static_cast<std::size_t>(n * bands));
    scene.truth.rows = rows;
    scene.truth.cols = cols;
    scene.truth.labels.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int32_t cls = region[static_cast<std::size_t>(i)];
        scene.truth.labels[static_cast<std::size_t>(i)] = cls + 1;
        double* spec = scene.cube.spectrum(i);
        for (std::int64_t b = 0; b < bands; ++b)
            spec[b] = cls * separation * direction[static_cast<std::size_t>(b)] + rng.gaussian();
    }
    return scene;
}

}  // namespace srland
