#include "srland/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include "srland/errors.hpp"
#include "srland/knn.hpp"
#include "srland/matrix.hpp"

namespace srland {
namespace {

// Relative offsets (dy, dx) with dy^2 + dx^2 <= r^2, ascending in (dy, dx) so
// the resulting flat indices come out ascending without a sort.
std::vector<std::pair<int, int>> ball_offsets(double r) {
    int reach = static_cast<int>(std::floor(r));
    double r2 = r * r;
    std::vector<std::pair<int, int>> offsets;
    for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
            if (static_cast<double>(dy) * dy + static_cast<double>(dx) * dx <= r2) {
                offsets.emplace_back(dy, dx);
            }
        }
    }
    return offsets;
}

// Mean spectral distance over stored off-diagonal edges (each undirected edge
// visited once via j > i). Serial Kahan accumulation keeps the value
// independent of build parallelism.
double edge_mean_sigma(const ImageCube& cube, const std::vector<std::int64_t>& row_ptr,
                       const std::vector<std::int32_t>& col, double given) {
    if (given != 0) {
        if (!(given > 0)) throw usage_error("sigma must be positive");
        return given;
    }
    double sum = 0.0, comp = 0.0;
    std::int64_t count = 0;
    std::int64_t n = static_cast<std::int64_t>(row_ptr.size()) - 1;
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) {
            std::int32_t j = col[static_cast<std::size_t>(e)];
            if (j <= i) continue;
            double d = std::sqrt(row_distance2(cube.spectrum(i), cube.spectrum(j), cube.bands));
            double y = d - comp;
            double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            ++count;
        }
    }
    if (count == 0) return 1.0;  // self-loops only; the bandwidth is never applied
    double mean = sum / static_cast<double>(count);
    if (mean == 0.0) {
        throw usage_error(
            "degenerate bandwidth: every retained edge joins identical spectra; "
            "raise --noise-variance or pass an explicit --sigma");
    }
    return mean;
}

// Fills kernel weights for a fixed CSR pattern, then drops entries whose
// weight underflowed to zero (keeps weights in (0, 1] as promised).
SparseAffinity finish_affinity(const ImageCube& cube, std::vector<std::int64_t> row_ptr,
                               std::vector<std::int32_t> col, double sigma) {
    std::int64_t n = static_cast<std::int64_t>(row_ptr.size()) - 1;
    std::vector<double> val(col.size());
    double inv_s2 = 1.0 / (sigma * sigma);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) {
            std::int32_t j = col[static_cast<std::size_t>(e)];
            double d2 = row_distance2(cube.spectrum(i), cube.spectrum(j), cube.bands);
            val[static_cast<std::size_t>(e)] = std::exp(-d2 * inv_s2);
        }
    }

    bool any_zero = std::find(val.begin(), val.end(), 0.0) != val.end();
    SparseAffinity w;
    w.n = n;
    w.sigma = sigma;
    if (!any_zero) {
        w.row_ptr = std::move(row_ptr);
        w.col = std::move(col);
        w.val = std::move(val);
        return w;
    }
    w.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    w.col.reserve(col.size());
    w.val.reserve(val.size());
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) {
            if (val[static_cast<std::size_t>(e)] == 0.0) continue;
            w.col.push_back(col[static_cast<std::size_t>(e)]);
            w.val.push_back(val[static_cast<std::size_t>(e)]);
        }
        w.row_ptr[static_cast<std::size_t>(i) + 1] = static_cast<std::int64_t>(w.col.size());
    }
    return w;
}

}  // namespace

std::vector<std::int32_t> spatial_ball(const GridShape& grid, std::int64_t i, double r) {
    if (!(r >= 1)) throw usage_error("spatial radius must be >= 1");
    if (i < 0 || i >= grid.points()) throw usage_error("spatial_ball: index out of range");
    std::int64_t row = grid.row_of(i);
    std::int64_t colix = grid.col_of(i);
    std::vector<std::int32_t> out;
    auto offsets = ball_offsets(r);
    out.reserve(offsets.size());
    for (auto [dy, dx] : offsets) {
        std::int64_t rr = row + dy;
        std::int64_t cc = colix + dx;
        if (rr < 0 || rr >= grid.rows || cc < 0 || cc >= grid.cols) continue;
        out.push_back(static_cast<std::int32_t>(grid.flat_index(rr, cc)));
    }
    return out;
}

SparseAffinity build_spatial_affinity(const ImageCube& cube, double r, double sigma) {
    if (!(r >= 1)) throw usage_error("spatial radius must be >= 1");
    GridShape grid = cube.grid();
    std::int64_t n = grid.points();
    auto offsets = ball_offsets(r);

    std::vector<std::int64_t> row_ptr(static_cast<std::size_t>(n) + 1, 0);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        std::int64_t row = grid.row_of(i), c = grid.col_of(i);
        std::int64_t count = 0;
        for (auto [dy, dx] : offsets) {
            std::int64_t rr = row + dy, cc = c + dx;
            if (rr >= 0 && rr < grid.rows && cc >= 0 && cc < grid.cols) ++count;
        }
        row_ptr[static_cast<std::size_t>(i) + 1] = count;
    }
    for (std::int64_t i = 0; i < n; ++i) row_ptr[static_cast<std::size_t>(i) + 1] += row_ptr[static_cast<std::size_t>(i)];

    std::vector<std::int32_t> col(static_cast<std::size_t>(row_ptr[static_cast<std::size_t>(n)]));
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        std::int64_t row = grid.row_of(i), c = grid.col_of(i);
        std::int64_t e = row_ptr[static_cast<std::size_t>(i)];
        for (auto [dy, dx] : offsets) {
            std::int64_t rr = row + dy, cc = c + dx;
            if (rr < 0 || rr >= grid.rows || cc < 0 || cc >= grid.cols) continue;
            col[static_cast<std::size_t>(e++)] = static_cast<std::int32_t>(grid.flat_index(rr, cc));
        }
    }

    double s = edge_mean_sigma(cube, row_ptr, col, sigma);
    SparseAffinity w = finish_affinity(cube, std::move(row_ptr), std::move(col), s);
    w.spatial_radius = r;
    return w;
}

SparseAffinity build_spectral_affinity(const ImageCube& cube, int k_g, double sigma) {
    std::int64_t n = cube.points();
    if (k_g < 1 || k_g >= n) throw usage_error("spectral neighbor count must satisfy 1 <= k_g < n");
    NeighborTable table = knn_exact(cube.values.data(), n, cube.bands, k_g);

    // Union symmetrization: row i holds self + knn(i) + everyone that lists i.
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 1);  // self-loop
    for (std::int64_t i = 0; i < n; ++i) {
        for (int t = 0; t < k_g; ++t) {
            std::int32_t j = table.neighbors(i)[t];
            ++counts[static_cast<std::size_t>(i)];
            ++counts[static_cast<std::size_t>(j)];
        }
    }
    std::vector<std::int64_t> row_ptr(static_cast<std::size_t>(n) + 1, 0);
    for (std::int64_t i = 0; i < n; ++i) row_ptr[static_cast<std::size_t>(i) + 1] = row_ptr[static_cast<std::size_t>(i)] + counts[static_cast<std::size_t>(i)];
    std::vector<std::int32_t> col(static_cast<std::size_t>(row_ptr[static_cast<std::size_t>(n)]));
    std::vector<std::int64_t> cursor(row_ptr.begin(), row_ptr.end() - 1);
    for (std::int64_t i = 0; i < n; ++i) col[static_cast<std::size_t>(cursor[static_cast<std::size_t>(i)]++)] = static_cast<std::int32_t>(i);
    for (std::int64_t i = 0; i < n; ++i) {
        for (int t = 0; t < k_g; ++t) {
            std::int32_t j = table.neighbors(i)[t];
            col[static_cast<std::size_t>(cursor[static_cast<std::size_t>(i)]++)] = j;
            col[static_cast<std::size_t>(cursor[static_cast<std::size_t>(j)]++)] = static_cast<std::int32_t>(i);
        }
    }

    // Sort and deduplicate each row (mutual neighbors appear twice).
    std::vector<std::int64_t> packed_ptr(static_cast<std::size_t>(n) + 1, 0);
    std::vector<std::int32_t> packed;
    packed.reserve(col.size());
    for (std::int64_t i = 0; i < n; ++i) {
        auto first = col.begin() + row_ptr[static_cast<std::size_t>(i)];
        auto last = col.begin() + row_ptr[static_cast<std::size_t>(i) + 1];
        std::sort(first, last);
        auto stop = std::unique(first, last);
        packed.insert(packed.end(), first, stop);
        packed_ptr[static_cast<std::size_t>(i) + 1] = static_cast<std::int64_t>(packed.size());
    }

    double s = edge_mean_sigma(cube, packed_ptr, packed, sigma);
    SparseAffinity w = finish_affinity(cube, std::move(packed_ptr), std::move(packed), s);
    w.spectral_neighbors = k_g;
    return w;
}

MarkovChain to_markov(const SparseAffinity& w) {
    std::int64_t n = w.n;
    MarkovChain chain;
    chain.n = n;
    chain.row_ptr = w.row_ptr;
    chain.col = w.col;
    chain.degree.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        std::int64_t b = w.row_ptr[static_cast<std::size_t>(i)], e = w.row_ptr[static_cast<std::size_t>(i) + 1];
        double d = kahan_sum(w.val.data() + b, e - b);
        if (!(d > 0)) {
            throw connectivity_error("isolated vertex " + std::to_string(i) + " (zero degree)");
        }
        chain.degree[static_cast<std::size_t>(i)] = d;
    }

    // Connectivity sweep over the (symmetric) pattern.
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::int64_t components = 0;
    for (std::int64_t start = 0; start < n; ++start) {
        if (seen[static_cast<std::size_t>(start)]) continue;
        ++components;
        std::deque<std::int64_t> queue{start};
        seen[static_cast<std::size_t>(start)] = 1;
        while (!queue.empty()) {
            std::int64_t u = queue.front();
            queue.pop_front();
            for (std::int64_t e = w.row_ptr[static_cast<std::size_t>(u)]; e < w.row_ptr[static_cast<std::size_t>(u) + 1]; ++e) {
                std::int32_t v = w.col[static_cast<std::size_t>(e)];
                if (!seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = 1;
                    queue.push_back(v);
                }
            }
        }
    }
    if (components > 1) {
        throw connectivity_error("graph is disconnected: " + std::to_string(components) + " components");
    }

    chain.transition.resize(w.val.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        double inv = 1.0 / chain.degree[static_cast<std::size_t>(i)];
        for (std::int64_t e = w.row_ptr[static_cast<std::size_t>(i)]; e < w.row_ptr[static_cast<std::size_t>(i) + 1]; ++e) {
            chain.transition[static_cast<std::size_t>(e)] = w.val[static_cast<std::size_t>(e)] * inv;
        }
    }
    double total = kahan_sum(chain.degree.data(), n);
    chain.stationary.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) chain.stationary[static_cast<std::size_t>(i)] = chain.degree[static_cast<std::size_t>(i)] / total;
    return chain;
}

void markov_apply(const MarkovChain& chain, const double* x, double* y) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < chain.n; ++i) {
        double acc = 0;
        for (std::int64_t e = chain.row_ptr[static_cast<std::size_t>(i)];
             e < chain.row_ptr[static_cast<std::size_t>(i) + 1]; ++e) {
            acc += chain.transition[static_cast<std::size_t>(e)] *
                   x[chain.col[static_cast<std::size_t>(e)]];
        }
        y[i] = acc;
    }
}

}  // namespace srland
