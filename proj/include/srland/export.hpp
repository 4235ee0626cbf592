#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "srland/image.hpp"
#include "srland/labeling.hpp"

namespace srland {

// 16-entry render palette (label 1 -> entry 0, wrapping for larger ids);
// label 0 renders black.
extern const unsigned char kPalette[16][3];

// Binary P6 image of a label map.
void write_ppm(const std::string& path, const std::vector<std::int32_t>& labels,
               const GridShape& grid);

// row,col,label,provenance
void write_label_csv(const std::string& path, const LabelMap& map, const GridShape& grid);

// index,row,col,label,order
void write_query_csv(const std::string& path,
                     const std::vector<std::pair<std::int32_t, std::int32_t>>& log,
                     const GridShape& grid);

}  // namespace srland
