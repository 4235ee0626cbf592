#include "srland/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "srland/errors.hpp"
#include "srland/rng.hpp"

namespace srland {

std::int32_t Oracle::query(std::int64_t i) {
    std::int32_t label = truth_->labels[static_cast<std::size_t>(i)];
    if (label <= 0) {
        throw usage_error("oracle queried at pixel " + std::to_string(i) +
                          " which has no ground truth");
    }
    log_.emplace_back(static_cast<std::int32_t>(i), label);
    return label;
}

LabeledSet sample_core(const ModeSet& modeset, std::int64_t budget, Oracle& oracle,
                       bool ensure_coverage) {
    if (budget < 1) throw usage_error("query budget must be >= 1");
    std::int64_t answerable = 0;
    for (std::int32_t m : modeset.modes) {
        if (oracle.answerable(m)) ++answerable;
    }
    if (answerable < budget) {
        throw usage_error("mode ranking holds " + std::to_string(answerable) +
                          " answerable modes; budget " + std::to_string(budget) +
                          " cannot be met");
    }

    LabeledSet out;
    out.budget_requested = budget;
    std::set<std::int32_t> missing;
    if (ensure_coverage) {
        auto classes = oracle.truth().classes_present();
        missing.insert(classes.begin(), classes.end());
    }
    for (std::int32_t m : modeset.modes) {
        bool want_more = out.size() < budget || (ensure_coverage && !missing.empty());
        if (!want_more) break;
        if (!oracle.answerable(m)) continue;
        std::int32_t label = oracle.query(m);
        out.indices.push_back(m);
        out.labels.push_back(label);
        missing.erase(label);
    }
    out.budget_used = out.size();
    out.coverage_warning = ensure_coverage && !missing.empty();
    return out;
}

std::vector<double> boundary_scores(const RowMatrix& e, const ModeSet& modeset) {
    if (modeset.modes.size() < 2) throw usage_error("boundary scores need at least two modes");
    std::int64_t n = e.rows;
    const auto& modes = modeset.modes;
    std::vector<double> scores(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        // Two nearest modes by (distance, index); a tie beyond the second
        // place cannot change |d1 - d2|.
        double d1 = -1.0, d2 = -1.0;
        std::int32_t i1 = -1;
        for (std::int32_t m : modes) {
            double d = row_distance2(e.row(i), e.row(m), e.cols);
            if (d1 < 0 || d < d1 || (d == d1 && m < i1)) {
                d2 = d1;
                d1 = d;
                i1 = m;
            } else if (d2 < 0 || d < d2) {
                d2 = d;
            }
        }
        scores[static_cast<std::size_t>(i)] = std::abs(std::sqrt(d1) - std::sqrt(d2));
    }
    return scores;
}

LabeledSet sample_boundary(const RowMatrix& e, const ModeSet& modeset, std::int64_t budget,
                           Oracle& oracle) {
    if (budget < 1) throw usage_error("query budget must be >= 1");
    std::vector<double> scores = boundary_scores(e, modeset);
    std::int64_t n = e.rows;

    std::vector<std::int32_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
        double sa = scores[static_cast<std::size_t>(a)], sb = scores[static_cast<std::size_t>(b)];
        if (sa != sb) return sa < sb;
        return a < b;
    });

    LabeledSet out;
    out.budget_requested = budget;
    for (std::int32_t i : order) {
        if (out.size() >= budget) break;
        if (!oracle.answerable(i)) continue;
        out.indices.push_back(i);
        out.labels.push_back(oracle.query(i));
    }
    if (out.size() < budget) {
        throw usage_error("only " + std::to_string(out.size()) +
                          " answerable pixels exist; budget " + std::to_string(budget) +
                          " cannot be met");
    }
    out.budget_used = out.size();
    return out;
}

LabeledSet sample_random(std::int64_t n, std::int64_t budget, Oracle& oracle,
                         std::uint64_t seed) {
    if (budget < 1) throw usage_error("query budget must be >= 1");
    std::vector<std::int32_t> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        if (oracle.answerable(i)) pool.push_back(static_cast<std::int32_t>(i));
    }
    if (static_cast<std::int64_t>(pool.size()) < budget) {
        throw usage_error("only " + std::to_string(pool.size()) +
                          " answerable pixels exist; budget " + std::to_string(budget) +
                          " cannot be met");
    }

    // Partial Fisher-Yates: the first `budget` slots become the sample.
    Rng rng(seed);
    LabeledSet out;
    out.budget_requested = budget;
    for (std::int64_t t = 0; t < budget; ++t) {
        std::int64_t swap_at = t + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(pool.size() - t)));
        std::swap(pool[static_cast<std::size_t>(t)], pool[static_cast<std::size_t>(swap_at)]);
        out.indices.push_back(pool[static_cast<std::size_t>(t)]);
        out.labels.push_back(oracle.query(pool[static_cast<std::size_t>(t)]));
    }
    out.budget_used = out.size();
    return out;
}

}  // namespace srland
