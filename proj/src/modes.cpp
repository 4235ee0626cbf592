#include "srland/modes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "srland/errors.hpp"

namespace srland {
namespace {

// First index attaining the maximum density (the forced-unique argmax).
std::int64_t density_argmax(const std::vector<double>& p) {
    std::int64_t arg = 0;
    for (std::int64_t i = 1; i < static_cast<std::int64_t>(p.size()); ++i) {
        if (p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(arg)]) arg = i;
    }
    return arg;
}

}  // namespace

NeighborTable dt_neighbor_table(const RowMatrix& e) {
    std::int64_t n = e.rows;
    if (n < 2) throw usage_error("dt_neighbor_table: need at least two points");
    int log2n = static_cast<int>(std::bit_width(static_cast<std::uint64_t>(n - 1)));
    int k = std::clamp<std::int64_t>(4 * static_cast<std::int64_t>(log2n), 1, n - 1);
    return knn_exact(e.data.data(), n, e.cols, k);
}

RhoResult compute_rho(const RowMatrix& e, const DensityProfile& density,
                      const NeighborTable* table) {
    std::int64_t n = e.rows;
    if (static_cast<std::int64_t>(density.p.size()) != n) {
        throw usage_error("compute_rho: density and embedding sizes differ");
    }
    const std::vector<double>& p = density.p;
    std::int64_t argmax = density_argmax(p);

    RhoResult result;
    result.raw.assign(static_cast<std::size_t>(n), 0.0);

    // The argmax takes the distance to the farthest point; everyone else the
    // distance to the nearest >=-density point. The farthest-from-argmax value
    // therefore dominates every other raw value, so it is the normalizer.
    {
        double far2 = 0.0;
        const double* base = e.row(argmax);
        for (std::int64_t j = 0; j < n; ++j) {
            far2 = std::max(far2, row_distance2(base, e.row(j), e.cols));
        }
        result.raw[static_cast<std::size_t>(argmax)] = std::sqrt(far2);
    }

    std::int64_t fallbacks = 0;
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : fallbacks)
    for (std::int64_t i = 0; i < n; ++i) {
        if (i == argmax) continue;
        double pi = p[static_cast<std::size_t>(i)];
        bool found = false;
        if (table) {
            for (int t = 0; t < table->k; ++t) {
                std::int32_t j = table->neighbors(i)[t];
                if (p[static_cast<std::size_t>(j)] >= pi) {
                    result.raw[static_cast<std::size_t>(i)] = std::sqrt(table->distances2(i)[t]);
                    found = true;
                    break;
                }
            }
        }
        if (!found) {
            ++fallbacks;
            double best2 = -1.0;
            const double* base = e.row(i);
            for (std::int64_t j = 0; j < n; ++j) {
                if (j == i || p[static_cast<std::size_t>(j)] < pi) continue;
                double d2 = row_distance2(base, e.row(j), e.cols);
                if (best2 < 0 || d2 < best2) best2 = d2;
            }
            // A >=-density candidate always exists for a non-argmax point
            // (the argmax itself qualifies).
            result.raw[static_cast<std::size_t>(i)] = std::sqrt(best2);
        }
    }
    result.full_scan_fallbacks = fallbacks;

    double top = result.raw[static_cast<std::size_t>(argmax)];
    result.normalized.assign(static_cast<std::size_t>(n), 0.0);
    if (top == 0.0) {
        // Fully coincident cloud: the argmax keeps score 1, everyone else 0.
        result.normalized[static_cast<std::size_t>(argmax)] = 1.0;
    } else {
        for (std::int64_t i = 0; i < n; ++i) {
            result.normalized[static_cast<std::size_t>(i)] = result.raw[static_cast<std::size_t>(i)] / top;
        }
    }
    return result;
}

ModeSet detect_modes(const DensityProfile& density, const RhoResult& rho, std::int64_t m_modes) {
    std::int64_t n = static_cast<std::int64_t>(density.p.size());
    if (m_modes < 1 || m_modes > n) throw usage_error("detect_modes: need 1 <= M <= n");
    if (static_cast<std::int64_t>(rho.normalized.size()) != n) {
        throw usage_error("detect_modes: rho and density sizes differ");
    }

    ModeSet set;
    set.rho = rho.normalized;
    set.full_scan_fallbacks = rho.full_scan_fallbacks;
    set.score.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        set.score[static_cast<std::size_t>(i)] = density.p[static_cast<std::size_t>(i)] * rho.normalized[static_cast<std::size_t>(i)];
    }

    std::vector<std::int32_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    auto by_score = [&](std::int32_t a, std::int32_t b) {
        double sa = set.score[static_cast<std::size_t>(a)], sb = set.score[static_cast<std::size_t>(b)];
        if (sa != sb) return sa > sb;
        return a < b;
    };
    std::partial_sort(order.begin(), order.begin() + m_modes, order.end(), by_score);
    set.modes.assign(order.begin(), order.begin() + m_modes);
    return set;
}

}  // namespace srland
