#include "srland/export.hpp"

#include <fstream>

#include "srland/errors.hpp"

namespace srland {

const unsigned char kPalette[16][3] = {
    {228, 26, 28},   {55, 126, 184}, {77, 175, 74},   {152, 78, 163},
    {255, 127, 0},   {255, 255, 51}, {166, 86, 40},   {247, 129, 191},
    {153, 153, 153}, {66, 146, 198}, {27, 158, 119},  {217, 95, 2},
    {117, 112, 179}, {231, 41, 138}, {102, 166, 30},  {230, 171, 2},
};

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
    std::ofstream out(path, mode);
    if (!out) throw io_error("cannot open for writing: " + path);
    return out;
}

}  // namespace

void write_ppm(const std::string& path, const std::vector<std::int32_t>& labels,
               const GridShape& grid) {
    if (static_cast<std::int64_t>(labels.size()) != grid.points()) {
        throw usage_error("label count does not match grid");
    }
    std::ofstream out = open_out(path, std::ios::binary);
    out << "P6\n" << grid.cols << " " << grid.rows << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(grid.cols) * 3);
    for (std::int64_t r = 0; r < grid.rows; ++r) {
        for (std::int64_t c = 0; c < grid.cols; ++c) {
            std::int32_t lab = labels[static_cast<std::size_t>(grid.flat_index(r, c))];
            unsigned char* px = &row[static_cast<std::size_t>(c) * 3];
            if (lab <= 0) {
                px[0] = px[1] = px[2] = 0;
            } else {
                const unsigned char* color = kPalette[(lab - 1) % 16];
                px[0] = color[0];
                px[1] = color[1];
                px[2] = color[2];
            }
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw io_error("short write: " + path);
}

void write_label_csv(const std::string& path, const LabelMap& map, const GridShape& grid) {
    std::ofstream out = open_out(path, std::ios::out);
    out << "row,col,label,provenance\n";
    for (std::int64_t r = 0; r < grid.rows; ++r) {
        for (std::int64_t c = 0; c < grid.cols; ++c) {
            std::size_t i = static_cast<std::size_t>(grid.flat_index(r, c));
            out << r << "," << c << "," << map.labels[i] << ","
                << label_source_name(map.provenance[i]) << "\n";
        }
    }
    if (!out) throw io_error("short write: " + path);
}

void write_query_csv(const std::string& path,
                     const std::vector<std::pair<std::int32_t, std::int32_t>>& log,
                     const GridShape& grid) {
    std::ofstream out = open_out(path, std::ios::out);
    out << "index,row,col,label,order\n";
    for (std::size_t t = 0; t < log.size(); ++t) {
        std::int64_t i = log[t].first;
        out << i << "," << grid.row_of(i) << "," << grid.col_of(i) << "," << log[t].second << ","
            << t << "\n";
    }
    if (!out) throw io_error("short write: " + path);
}

}  // namespace srland
