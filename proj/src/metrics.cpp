#include "srland/metrics.hpp"

#include <algorithm>
#include <map>

#include "srland/errors.hpp"

namespace srland {
namespace {

// Confusion counts over gt>0 pixels, indexed by (truth label, predicted label).
struct Confusion {
    std::map<std::int32_t, std::map<std::int32_t, std::int64_t>> counts;
    std::int64_t total = 0;

    Confusion(const std::vector<std::int32_t>& predicted, const GroundTruth& truth) {
        if (predicted.size() != truth.labels.size()) {
            throw usage_error("prediction and ground truth sizes differ");
        }
        for (std::size_t i = 0; i < predicted.size(); ++i) {
            std::int32_t actual = truth.labels[i];
            if (actual <= 0) continue;
            ++counts[actual][predicted[i]];
            ++total;
        }
        if (total == 0) throw usage_error("ground truth has no labeled pixels");
    }
};

}  // namespace

double overall_accuracy(const std::vector<std::int32_t>& predicted, const GroundTruth& truth) {
    Confusion c(predicted, truth);
    std::int64_t hit = 0;
    for (auto& [actual, row] : c.counts) {
        auto it = row.find(actual);
        if (it != row.end()) hit += it->second;
    }
    return static_cast<double>(hit) / static_cast<double>(c.total);
}

double average_accuracy(const std::vector<std::int32_t>& predicted, const GroundTruth& truth) {
    Confusion c(predicted, truth);
    double sum = 0.0;
    std::int64_t classes = 0;
    for (auto& [actual, row] : c.counts) {
        std::int64_t support = 0, hit = 0;
        for (auto& [pred, count] : row) {
            support += count;
            if (pred == actual) hit += count;
        }
        sum += static_cast<double>(hit) / static_cast<double>(support);
        ++classes;
    }
    return sum / static_cast<double>(classes);
}

double cohens_kappa(const std::vector<std::int32_t>& predicted, const GroundTruth& truth) {
    Confusion c(predicted, truth);
    std::map<std::int32_t, std::int64_t> actual_marginal, predicted_marginal;
    std::int64_t hit = 0;
    for (auto& [actual, row] : c.counts) {
        for (auto& [pred, count] : row) {
            actual_marginal[actual] += count;
            predicted_marginal[pred] += count;
            if (pred == actual) hit += count;
        }
    }
    double n = static_cast<double>(c.total);
    double p_o = static_cast<double>(hit) / n;
    double p_e = 0.0;
    for (auto& [label, count] : actual_marginal) {
        auto it = predicted_marginal.find(label);
        if (it == predicted_marginal.end()) continue;
        p_e += (static_cast<double>(count) / n) * (static_cast<double>(it->second) / n);
    }
    if (p_e >= 1.0) return p_o >= 1.0 ? 1.0 : 0.0;
    return (p_o - p_e) / (1.0 - p_e);
}

}  // namespace srland
