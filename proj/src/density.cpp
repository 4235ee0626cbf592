#include "srland/density.hpp"

#include <cmath>
#include <string>

#include "srland/errors.hpp"
#include "srland/matrix.hpp"

namespace srland {

NeighborTable spectral_knn(const ImageCube& cube, int k) {
    return knn_exact(cube.values.data(), cube.points(), cube.bands, k);
}

double adaptive_bandwidth(const NeighborTable& table) {
    if (table.n < 1 || table.k < 1) throw usage_error("adaptive_bandwidth: empty neighbor table");
    double sum = 0.0, comp = 0.0;
    for (std::int64_t i = 0; i < table.n; ++i) {
        for (int t = 0; t < table.k; ++t) {
            double d = std::sqrt(table.distances2(i)[t]);
            double y = d - comp;
            double s = sum + y;
            comp = (s - sum) - y;
            sum = s;
        }
    }
    double mean = sum / (static_cast<double>(table.n) * table.k);
    if (mean == 0.0) {
        throw usage_error("degenerate KDE bandwidth: all neighbor distances are zero; "
                          "raise --noise-variance to separate duplicate spectra");
    }
    return 0.5 * mean;
}

DensityProfile kde(const ImageCube& cube, const NeighborTable& table, double sigma0) {
    (void)cube;  // distances already live in the table
    if (!(sigma0 > 0)) throw usage_error("KDE bandwidth must be positive");
    std::int64_t n = table.n;
    DensityProfile profile;
    profile.bandwidth = sigma0;
    profile.k = table.k;
    profile.p.resize(static_cast<std::size_t>(n));
    double inv_s2 = 1.0 / (sigma0 * sigma0);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int t = 0; t < table.k; ++t) {
            acc += std::exp(-table.distances2(i)[t] * inv_s2);
        }
        profile.p[static_cast<std::size_t>(i)] = acc;
    }
    for (std::int64_t i = 0; i < n; ++i) {
        double v = profile.p[static_cast<std::size_t>(i)];
        if (!std::isfinite(v)) throw numeric_error("non-finite density value");
        if (v == 0.0) {
            throw numeric_error("density underflow at point " + std::to_string(i) +
                                "; widen the bandwidth or add noise");
        }
    }
    double total = kahan_sum(profile.p.data(), n);
    if (!(total > 0)) throw numeric_error("density normalization degenerate (total mass 0)");
    for (std::int64_t i = 0; i < n; ++i) profile.p[static_cast<std::size_t>(i)] /= total;
    return profile;
}

}  // namespace srland
