#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "srland/image.hpp"
#include "srland/knn.hpp"
#include "srland/matrix.hpp"
#include "srland/sampling.hpp"

namespace srland {

enum class LabelSource : std::uint8_t {
    none = 0,
    seed,
    stage1,
    stage2_consensus,
    stage2_nn,
    stage2_global,
};

const char* label_source_name(LabelSource s);

struct LabelMap {
    std::vector<std::int32_t> labels;       // 0 only while processing
    std::vector<LabelSource> provenance;
    std::int64_t stage1_deferrals = 0;
};

// Majority label among the labeled pixels spatially within r of i (i itself
// excluded). Exists when the most common label is unique and its share
// strictly exceeds `threshold`; threshold 0.5 is a strict majority.
std::optional<std::int32_t> consensus_label(const std::vector<std::int32_t>& labels,
                                            const GridShape& grid, std::int64_t i, double r,
                                            double threshold = 0.5);

// Density-ordered two-stage propagation. Stage 1 walks points by decreasing
// density and copies the label of the nearest-in-embedding already-labeled
// point of strictly higher density, deferring when no such point exists or
// when a conflicting spatial consensus vetoes it. Stage 2 resolves deferrals
// consensus-first, then nearest labeled higher-density point, then globally
// nearest labeled point. Seeds are never overwritten. `table` (embedding
// nearest neighbors) is an optional accelerator; results do not depend on it.
LabelMap two_stage_label(const LabeledSet& seeds, const std::vector<double>& p,
                         const RowMatrix& e, const GridShape& grid, double r,
                         double threshold = 0.5, const NeighborTable* table = nullptr);

}  // namespace srland
