#pragma once

#include <cstdint>
#include <vector>

#include "srland/graph.hpp"
#include "srland/matrix.hpp"

namespace srland {

struct EigsOptions {
    double tol = 1e-10;              // residual tolerance on the symmetric operator
    int matvecs_per_pair = 50;       // budget: 50 * m matvecs per requested pair
    std::uint64_t seed = 0x5eedULL;  // start-vector seed; fixed so runs reproduce
};

// Truncated spectral description of the random walk. psi holds the right
// eigenvectors of P scaled so that sum_i pi_i psi_k(i)^2 = 1; with that scale
// (and only that one) the embedding row distance reproduces the exact
// transition-profile distance, which the tests pin down. psi column 0 is the
// constant vector 1.
struct DiffusionModel {
    std::int64_t n = 0;
    int m = 0;
    std::int64_t time = -1;            // set by embed()
    std::vector<double> eigenvalues;   // lambda_1 = 1 >= |lambda_2| >= ...
    RowMatrix psi;                     // n x m
    RowMatrix embedding;               // n x m, E[i][k] = lambda_k^time * psi_k(i)
};

// Largest-|lambda| eigenpairs of P via thick-restart Lanczos on the
// symmetrized operator (matrix touched only through mat-vec products).
DiffusionModel top_eigenpairs(const MarkovChain& chain, int m, const EigsOptions& opts = {});

// Fills model.embedding for integer diffusion time t >= 0.
void embed(DiffusionModel& model, std::int64_t t);

// Euclidean distance between embedding rows i and j (requires embed()).
double diffusion_distance(const DiffusionModel& model, std::int64_t i, std::int64_t j);

// Oracle: the transition-profile distance computed literally from the t-step
// transition rows. Dense in spirit; refuses n > 2000.
double diffusion_distance_exact(const MarkovChain& chain, std::int64_t t, std::int64_t i,
                                std::int64_t j);

// The `count` rows of E nearest to row i (excluding i), ties by lower index.
std::vector<std::int32_t> dt_nearest(const RowMatrix& e, std::int64_t i, int count);

}  // namespace srland
