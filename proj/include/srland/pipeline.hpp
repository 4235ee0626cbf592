#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "srland/image.hpp"
#include "srland/labeling.hpp"
#include "srland/matrix.hpp"
#include "srland/modes.hpp"
#include "srland/sampling.hpp"

namespace srland {

// Everything a run needs. Zero on radius / kg / m / kde_k means "resolve a
// default from the data" (documented per field); the resolved values land in
// the run record while the requested ones stay here so a stored config
// replays bit-for-bit.
struct RunConfig {
    std::string dataset_id = "synthetic";
    std::string graph_mode = "spatial";   // "spatial" | "knn"
    std::string sampler = "core";         // "core" | "boundary" | "random"
    double radius = 0;                    // 0: per-dataset preset, else 3
    int kg = 0;                           // 0: ceil(log2 n)
    std::int64_t t = 30;
    int m = 50;                           // clamped to n
    int kde_k = 100;                      // clamped to n - 1
    std::int64_t budget = 10;
    bool ensure_coverage = true;
    double consensus_threshold = 0.5;
    double sigma = 0;                     // 0: mean retained-edge distance
    double noise_variance = 1e-4;
    std::uint64_t seed = 1;
};

struct RunRecord {
    std::string dataset_id;
    std::string variant;          // "<graph_mode>-<sampler>"
    double radius = 0;            // resolved
    int kg = 0;                   // resolved (knn mode only)
    std::int64_t t = 0;
    int m = 0;                    // resolved
    int kde_k = 0;                // resolved
    std::int64_t budget_requested = 0;
    std::int64_t budget_used = 0;
    std::uint64_t seed = 0;
    double oa = 0, aa = 0, kappa = 0;
    double seconds = 0;
    bool coverage_warning = false;
    double sigma_used = 0;
    std::int64_t n = 0;
    std::int64_t bands = 0;
    std::int64_t stage1_deferrals = 0;
    std::int64_t fdp_fallbacks = 0;
    std::int64_t modes_ranked = 0;
};

struct PipelineResult {
    RunRecord record;
    LabelMap map;
    LabeledSet seeds;
    std::vector<std::pair<std::int32_t, std::int32_t>> query_log;
    // Populated for debug dumps; density/rho/score per point.
    std::vector<double> density;
    std::vector<double> rho;
    std::vector<double> score;
    std::vector<double> eigenvalues;
    RowMatrix psi;  // n x m eigenvector matrix
};

// Graph -> spectra -> density -> modes -> sampler -> labeling -> metrics.
// Errors from stages are rethrown with the stage name prefixed.
PipelineResult run_pipeline(const ImageCube& cube, const GroundTruth& truth,
                            const RunConfig& config);

struct CurvePoint {
    std::int64_t budget = 0;
    int trials = 0;
    double mean_oa = 0, mean_aa = 0, mean_kappa = 0, mean_seconds = 0;
};

// Mean accuracy per budget over independent trials (trial index varies the
// noise and sampler sub-seeds only). Deterministic variants (non-random
// sampler with zero noise) collapse to one trial.
std::vector<CurvePoint> learning_curve(const ImageCube& cube, const GroundTruth& truth,
                                       const RunConfig& config,
                                       const std::vector<std::int64_t>& budgets, int trials);

struct SweepPoint {
    double radius = 0;
    int trials = 0;
    double mean_oa = 0, mean_aa = 0, mean_kappa = 0, mean_seconds = 0;
};

// Spatial-core accuracy as a function of the graph radius.
std::vector<SweepPoint> radius_sweep(const ImageCube& cube, const GroundTruth& truth,
                                     const RunConfig& config, const std::vector<double>& radii,
                                     int trials);

struct BenchPoint {
    std::int64_t n = 0;
    std::int64_t rows = 0, cols = 0;
    double seconds = 0;
    double oa = 0;
};

struct SceneConfig {
    std::int64_t bands = 8;
    std::int64_t classes = 8;
    double separation = 4.0;
    int smoothness = 2;
};

// Full-pipeline wall time on synthetic scenes of growing size (fixed
// radius / m / k per the run config).
std::vector<BenchPoint> scaling_benchmark(const std::vector<std::int64_t>& sizes,
                                          const RunConfig& config, const SceneConfig& scene);

// Near-square factorization used by the benchmark: the largest divisor of n
// that is <= sqrt(n), paired with its cofactor.
std::pair<std::int64_t, std::int64_t> near_square_grid(std::int64_t n);

// Trial sub-seed scheme shared by the drivers (stream 1: noise, 2: sampler).
std::uint64_t noise_seed(std::uint64_t root, std::uint64_t trial);
std::uint64_t sampler_seed(std::uint64_t root, std::uint64_t trial);

// Radius actually used when the config leaves it 0: per-dataset preset
// (salinas -> 11, indian -> 14 by id substring), else 3.
double resolve_radius(const RunConfig& config);

}  // namespace srland
