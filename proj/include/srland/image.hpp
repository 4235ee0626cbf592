#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace srland {

// Row-major grid of n1 x n2 pixels; flat point index i <-> (i / n2, i % n2).
struct GridShape {
    std::int64_t rows = 0;
    std::int64_t cols = 0;

    std::int64_t points() const { return rows * cols; }
    std::int64_t flat_index(std::int64_t row, std::int64_t col) const {
        return row * cols + col;
    }
    std::int64_t row_of(std::int64_t i) const { return i / cols; }
    std::int64_t col_of(std::int64_t i) const { return i % cols; }
};

// An n1 x n2 x bands image held as 64-bit reals, doubling as the flattened
// point cloud {x_i} with x_i = spectrum(i) in R^bands.
struct ImageCube {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::int64_t bands = 0;
    std::vector<double> values;  // row-major (rows, cols, bands)

    GridShape grid() const { return {rows, cols}; }
    std::int64_t points() const { return rows * cols; }
    const double* spectrum(std::int64_t i) const { return values.data() + i * bands; }
    double* spectrum(std::int64_t i) { return values.data() + i * bands; }
};

// Per-pixel reference labels; 0 means "no ground truth here". Accuracy and
// oracle queries are restricted to pixels with label > 0.
struct GroundTruth {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::vector<std::int32_t> labels;

    GridShape grid() const { return {rows, cols}; }
    std::vector<std::int32_t> classes_present() const;
    std::int64_t labeled_count() const;
};

ImageCube load_npy_cube(const std::string& path);
GroundTruth load_npy_labels(const std::string& path);

void save_npy_cube(const ImageCube& cube, const std::string& path);
void save_npy_labels(std::int64_t rows, std::int64_t cols,
                     const std::vector<std::int32_t>& labels, const std::string& path);

}  // namespace srland
