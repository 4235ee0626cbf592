#pragma once

#include <cstdint>
#include <vector>

#include "srland/density.hpp"
#include "srland/matrix.hpp"

namespace srland {

// rho_t per point: diffusion distance to the nearest point of >= density
// (distance to the farthest point, for the global density argmax), normalized
// so the maximum is exactly 1.
struct RhoResult {
    std::vector<double> raw;         // before normalization
    std::vector<double> normalized;
    std::int64_t full_scan_fallbacks = 0;  // points the fast prefix missed
};

// Ranked maximizers of the mode score p * rho_t.
struct ModeSet {
    std::vector<std::int32_t> modes;     // M indices, score descending
    std::vector<double> rho;             // per-point, normalized
    std::vector<double> score;           // per-point p * rho
    std::int64_t full_scan_fallbacks = 0;
};

// Neighbor table in embedding space sized for the fast rho scan
// (4 * ceil(log2 n) neighbors, clamped to n - 1).
NeighborTable dt_neighbor_table(const RowMatrix& e);

// Exact rho_t. When `table` is given its sorted prefix is scanned first; any
// point whose prefix holds no >=-density candidate falls back to a full scan,
// so the shortcut never changes a value.
RhoResult compute_rho(const RowMatrix& e, const DensityProfile& density,
                      const NeighborTable* table = nullptr);

// The M largest p * rho_t scores, descending, ties by lower index.
ModeSet detect_modes(const DensityProfile& density, const RhoResult& rho, std::int64_t m_modes);

}  // namespace srland
