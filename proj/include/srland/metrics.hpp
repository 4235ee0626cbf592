#pragma once

#include <cstdint>
#include <vector>

#include "srland/image.hpp"

namespace srland {

// All metrics are computed over pixels with ground truth only (label > 0).
double overall_accuracy(const std::vector<std::int32_t>& predicted, const GroundTruth& truth);

// Unweighted mean of per-class recall over classes present in the truth.
double average_accuracy(const std::vector<std::int32_t>& predicted, const GroundTruth& truth);

// Cohen's kappa from the confusion matrix; if expected agreement is 1 the
// value is defined as 1 for perfect observed agreement and 0 otherwise.
double cohens_kappa(const std::vector<std::int32_t>& predicted, const GroundTruth& truth);

}  // namespace srland
