#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "srland/image.hpp"
#include "srland/matrix.hpp"
#include "srland/modes.hpp"

namespace srland {

// Label source backed by ground truth. Only pixels with a positive
// ground-truth label are answerable; every answered query is logged.
class Oracle {
  public:
    explicit Oracle(const GroundTruth& truth) : truth_(&truth) {}

    bool answerable(std::int64_t i) const { return truth_->labels[static_cast<std::size_t>(i)] > 0; }
    std::int32_t query(std::int64_t i);

    const std::vector<std::pair<std::int32_t, std::int32_t>>& log() const { return log_; }
    const GroundTruth& truth() const { return *truth_; }

  private:
    const GroundTruth* truth_;
    std::vector<std::pair<std::int32_t, std::int32_t>> log_;  // (index, label) in query order
};

struct LabeledSet {
    std::vector<std::int32_t> indices;
    std::vector<std::int32_t> labels;
    std::int64_t budget_requested = 0;
    std::int64_t budget_used = 0;        // == indices.size()
    bool coverage_warning = false;       // ranking exhausted with classes missing

    std::int64_t size() const { return static_cast<std::int64_t>(indices.size()); }
};

// Queries the top-L answerable modes in score order. With ensure_coverage,
// keeps walking the ranking past L until every ground-truth class has a label
// (budget grows; exhaustion is a warning, not an error).
LabeledSet sample_core(const ModeSet& modeset, std::int64_t budget, Oracle& oracle,
                       bool ensure_coverage);

// B(x) = |D_t(m1, x) - D_t(m2, x)| for the two modes nearest x in embedding
// distance; small values sit near cluster boundaries.
std::vector<double> boundary_scores(const RowMatrix& e, const ModeSet& modeset);

// Queries the L answerable minimizers of B, ties by lower index. Deliberately
// gets no coverage help: this variant exists as a faithful ablation.
LabeledSet sample_boundary(const RowMatrix& e, const ModeSet& modeset, std::int64_t budget,
                           Oracle& oracle);

// Uniform sample without replacement from the answerable pixels.
LabeledSet sample_random(std::int64_t n, std::int64_t budget, Oracle& oracle, std::uint64_t seed);

}  // namespace srland
