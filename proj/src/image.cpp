#include "srland/image.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "srland/errors.hpp"
#include "srland/npy.hpp"

namespace srland {

std::vector<std::int32_t> GroundTruth::classes_present() const {
    std::set<std::int32_t> seen;
    for (auto label : labels)
        if (label > 0) seen.insert(label);
    return {seen.begin(), seen.end()};
}

std::int64_t GroundTruth::labeled_count() const {
    std::int64_t count = 0;
    for (auto label : labels)
        if (label > 0) ++count;
    return count;
}

ImageCube load_npy_cube(const std::string& path) {
    NpyArray arr = load_npy(path);
    if (arr.shape.size() != 3)
        throw io_error(path + ": expected a rank-3 (rows, cols, bands) array, got rank " +
                       std::to_string(arr.shape.size()));
    ImageCube cube;
    cube.rows = arr.shape[0];
    cube.cols = arr.shape[1];
    cube.bands = arr.shape[2];
    if (cube.rows <= 0 || cube.cols <= 0 || cube.bands <= 0)
        throw io_error(path + ": degenerate cube shape");
    if (arr.is_integer) {
        cube.values.assign(arr.ints.begin(), arr.ints.end());
    } else {
        cube.values = std::move(arr.reals);
    }
    for (std::size_t i = 0; i < cube.values.size(); ++i) {
        if (!std::isfinite(cube.values[i]))
            throw io_error(path + ": non-finite value at flat element " + std::to_string(i));
    }
    return cube;
}

GroundTruth load_npy_labels(const std::string& path) {
    NpyArray arr = load_npy(path);
    if (arr.shape.size() != 2)
        throw io_error(path + ": expected a rank-2 (rows, cols) label array, got rank " +
                       std::to_string(arr.shape.size()));
    if (!arr.is_integer)
        throw io_error(path + ": ground truth must have an integer element type");
    GroundTruth gt;
    gt.rows = arr.shape[0];
    gt.cols = arr.shape[1];
    gt.labels.resize(arr.ints.size());
    bool any_positive = false;
    for (std::size_t i = 0; i < arr.ints.size(); ++i) {
        std::int64_t v = arr.ints[i];
        if (v < 0)
            throw io_error(path + ": negative label at flat element " + std::to_string(i));
        if (v > INT32_MAX)
            throw io_error(path + ": label out of range at flat element " + std::to_string(i));
        gt.labels[i] = static_cast<std::int32_t>(v);
        any_positive = any_positive || v > 0;
    }
    if (!any_positive)
        throw io_error(path + ": ground truth contains no labeled pixels");
    return gt;
}

void save_npy_cube(const ImageCube& cube, const std::string& path) {
    save_npy(path, {cube.rows, cube.cols, cube.bands}, cube.values.data());
}

void save_npy_labels(std::int64_t rows, std::int64_t cols,
                     const std::vector<std::int32_t>& labels, const std::string& path) {
    std::vector<std::int64_t> wide(labels.begin(), labels.end());
    save_npy(path, {rows, cols}, wide.data());
}

}  // namespace srland
