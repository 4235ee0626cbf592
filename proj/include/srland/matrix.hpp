#pragma once

#include <cstdint>
#include <vector>

namespace srland {

// Dense row-major matrix; rows are points, columns are coordinates.
struct RowMatrix {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::vector<double> data;

    RowMatrix() = default;
    RowMatrix(std::int64_t r, std::int64_t c) : rows(r), cols(c), data(static_cast<std::size_t>(r * c), 0.0) {}

    double* row(std::int64_t i) { return data.data() + i * cols; }
    const double* row(std::int64_t i) const { return data.data() + i * cols; }
    double& at(std::int64_t i, std::int64_t j) { return data[static_cast<std::size_t>(i * cols + j)]; }
    double at(std::int64_t i, std::int64_t j) const { return data[static_cast<std::size_t>(i * cols + j)]; }
    bool empty() const { return data.empty(); }
};

// Euclidean distance between two coordinate rows; both routes that compare
// distances use this one definition so values agree bitwise.
inline double row_distance2(const double* a, const double* b, std::int64_t dim) {
    double acc = 0;
    for (std::int64_t k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        acc += d * d;
    }
    return acc;
}

// Serial compensated (Kahan) summation; deterministic and accurate enough to
// verify the 1e-12 normalization invariants.
inline double kahan_sum(const double* values, std::int64_t count) {
    double sum = 0, carry = 0;
    for (std::int64_t i = 0; i < count; ++i) {
        const double y = values[i] - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace srland
