#include "srland/labeling.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "srland/errors.hpp"
#include "srland/graph.hpp"

namespace srland {
namespace {

std::optional<std::int32_t> majority(const std::vector<std::int32_t>& labels,
                                     const std::vector<std::int32_t>& ball, std::int64_t self,
                                     double threshold) {
    // Neighborhoods are small; a flat (label, count) list beats hashing.
    std::vector<std::pair<std::int32_t, std::int32_t>> counts;
    std::int32_t total = 0;
    for (std::int32_t j : ball) {
        if (j == self) continue;
        std::int32_t lab = labels[static_cast<std::size_t>(j)];
        if (lab == 0) continue;
        ++total;
        bool seen = false;
        for (auto& entry : counts) {
            if (entry.first == lab) {
                ++entry.second;
                seen = true;
                break;
            }
        }
        if (!seen) counts.emplace_back(lab, 1);
    }
    if (total == 0) return std::nullopt;
    std::int32_t best = 0, best_count = 0;
    bool unique = false;
    for (auto& [lab, count] : counts) {
        if (count > best_count) {
            best = lab;
            best_count = count;
            unique = true;
        } else if (count == best_count) {
            unique = false;
        }
    }
    if (!unique) return std::nullopt;
    if (static_cast<double>(best_count) > threshold * static_cast<double>(total)) return best;
    return std::nullopt;
}

// Nearest labeled point to i, optionally restricted to strictly higher
// density; (distance, index) tie rule. The prefix of i's sorted embedding
// neighbors is scanned first; a miss falls back to the exact full scan.
std::int64_t nearest_labeled(std::int64_t i, const std::vector<std::int32_t>& labels,
                             const std::vector<double>& p, bool higher_only,
                             const RowMatrix& e, const NeighborTable* table) {
    double pi = p[static_cast<std::size_t>(i)];
    if (table) {
        for (int t = 0; t < table->k; ++t) {
            std::int32_t j = table->neighbors(i)[t];
            if (labels[static_cast<std::size_t>(j)] == 0) continue;
            if (higher_only && !(p[static_cast<std::size_t>(j)] > pi)) continue;
            return j;
        }
    }
    std::int64_t best = -1;
    double best2 = 0.0;
    for (std::int64_t j = 0; j < e.rows; ++j) {
        if (j == i || labels[static_cast<std::size_t>(j)] == 0) continue;
        if (higher_only && !(p[static_cast<std::size_t>(j)] > pi)) continue;
        double d2 = row_distance2(e.row(i), e.row(j), e.cols);
        if (best < 0 || d2 < best2) {
            best = j;
            best2 = d2;
        }
    }
    return best;
}

}  // namespace

const char* label_source_name(LabelSource s) {
    switch (s) {
        case LabelSource::none: return "none";
        case LabelSource::seed: return "seed";
        case LabelSource::stage1: return "stage1";
        case LabelSource::stage2_consensus: return "stage2-consensus";
        case LabelSource::stage2_nn: return "stage2-nn";
        case LabelSource::stage2_global: return "stage2-global";
    }
    return "unknown";
}

std::optional<std::int32_t> consensus_label(const std::vector<std::int32_t>& labels,
                                            const GridShape& grid, std::int64_t i, double r,
                                            double threshold) {
    return majority(labels, spatial_ball(grid, i, r), i, threshold);
}

LabelMap two_stage_label(const LabeledSet& seeds, const std::vector<double>& p,
                         const RowMatrix& e, const GridShape& grid, double r,
                         double threshold, const NeighborTable* table) {
    std::int64_t n = e.rows;
    if (seeds.size() == 0) throw usage_error("labeling needs a nonempty seed set");
    if (static_cast<std::int64_t>(p.size()) != n || grid.points() != n) {
        throw usage_error("labeling inputs disagree on point count");
    }
    if (threshold < 0 || threshold > 1) throw usage_error("consensus threshold must lie in [0, 1]");

    LabelMap map;
    map.labels.assign(static_cast<std::size_t>(n), 0);
    map.provenance.assign(static_cast<std::size_t>(n), LabelSource::none);
    for (std::int64_t s = 0; s < seeds.size(); ++s) {
        std::int32_t idx = seeds.indices[static_cast<std::size_t>(s)];
        if (map.labels[static_cast<std::size_t>(idx)] != 0) {
            throw usage_error("duplicate seed index " + std::to_string(idx));
        }
        map.labels[static_cast<std::size_t>(idx)] = seeds.labels[static_cast<std::size_t>(s)];
        map.provenance[static_cast<std::size_t>(idx)] = LabelSource::seed;
    }

    std::vector<std::int32_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
        double pa = p[static_cast<std::size_t>(a)], pb = p[static_cast<std::size_t>(b)];
        if (pa != pb) return pa > pb;
        return a < b;
    });

    // Highest density currently carrying a label: lets stage 1 skip the
    // candidate search when no labeled point sits above i at all.
    double top_labeled_p = -1.0;
    for (std::int32_t idx : seeds.indices) {
        top_labeled_p = std::max(top_labeled_p, p[static_cast<std::size_t>(idx)]);
    }

    for (std::int32_t i : order) {
        if (map.labels[static_cast<std::size_t>(i)] != 0) continue;
        if (!(top_labeled_p > p[static_cast<std::size_t>(i)])) {
            ++map.stage1_deferrals;
            continue;
        }
        std::int64_t src = nearest_labeled(i, map.labels, p, true, e, table);
        if (src < 0) {
            ++map.stage1_deferrals;
            continue;
        }
        std::int32_t purported = map.labels[static_cast<std::size_t>(src)];
        auto consensus = consensus_label(map.labels, grid, i, r, threshold);
        if (consensus && *consensus != purported) {
            ++map.stage1_deferrals;
            continue;
        }
        map.labels[static_cast<std::size_t>(i)] = purported;
        map.provenance[static_cast<std::size_t>(i)] = LabelSource::stage1;
        top_labeled_p = std::max(top_labeled_p, p[static_cast<std::size_t>(i)]);
    }

    for (std::int32_t i : order) {
        if (map.labels[static_cast<std::size_t>(i)] != 0) continue;
        auto consensus = consensus_label(map.labels, grid, i, r, threshold);
        if (consensus) {
            map.labels[static_cast<std::size_t>(i)] = *consensus;
            map.provenance[static_cast<std::size_t>(i)] = LabelSource::stage2_consensus;
            continue;
        }
        std::int64_t src = nearest_labeled(i, map.labels, p, true, e, table);
        if (src >= 0) {
            map.labels[static_cast<std::size_t>(i)] = map.labels[static_cast<std::size_t>(src)];
            map.provenance[static_cast<std::size_t>(i)] = LabelSource::stage2_nn;
            continue;
        }
        src = nearest_labeled(i, map.labels, p, false, e, table);
        map.labels[static_cast<std::size_t>(i)] = map.labels[static_cast<std::size_t>(src)];
        map.provenance[static_cast<std::size_t>(i)] = LabelSource::stage2_global;
    }
    return map;
}

}  // namespace srland
