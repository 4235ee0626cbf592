#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace srland {

// Minimal NPY v1.0 container support. Readers accept little-endian C-order
// arrays only; writers emit '<f8' / '<i8' with the header padded to a
// 64-byte boundary, so a given array always serializes to identical bytes.

struct NpyArray {
    std::vector<std::int64_t> shape;
    bool is_integer = false;          // true when loaded from an integer descr
    std::vector<double> reals;        // populated when !is_integer
    std::vector<std::int64_t> ints;   // populated when is_integer

    std::int64_t element_count() const {
        std::int64_t n = 1;
        for (auto s : shape) n *= s;
        return n;
    }
};

NpyArray load_npy(const std::string& path);

void save_npy(const std::string& path, const std::vector<std::int64_t>& shape,
              const double* data);
void save_npy(const std::string& path, const std::vector<std::int64_t>& shape,
              const std::int64_t* data);

}  // namespace srland
