#include "srland/npy.hpp"

#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "srland/errors.hpp"

namespace srland {

namespace {

constexpr char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

// Extracts the quoted string value for `key` out of the python-dict header.
std::string header_string(const std::string& header, const std::string& key,
                          const std::string& path) {
    auto pos = header.find("'" + key + "'");
    if (pos == std::string::npos)
        throw io_error(path + ": NPY header missing key '" + key + "'");
    pos = header.find(':', pos);
    if (pos == std::string::npos)
        throw io_error(path + ": malformed NPY header");
    pos = header.find_first_not_of(" \t", pos + 1);
    if (pos == std::string::npos)
        throw io_error(path + ": malformed NPY header");
    if (header[pos] == '\'' || header[pos] == '"') {
        char quote = header[pos];
        auto end = header.find(quote, pos + 1);
        if (end == std::string::npos)
            throw io_error(path + ": malformed NPY header");
        return header.substr(pos + 1, end - pos - 1);
    }
    auto end = header.find_first_of(",}", pos);
    return header.substr(pos, end - pos);
}

std::vector<std::int64_t> parse_shape(const std::string& header, const std::string& path) {
    auto pos = header.find("'shape'");
    if (pos == std::string::npos) throw io_error(path + ": NPY header missing shape");
    auto open = header.find('(', pos);
    auto close = header.find(')', open);
    if (open == std::string::npos || close == std::string::npos)
        throw io_error(path + ": malformed NPY shape");
    std::vector<std::int64_t> shape;
    std::string body = header.substr(open + 1, close - open - 1);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        shape.push_back(std::stoll(item.substr(first)));
    }
    return shape;
}

struct Descr {
    char byte_order;  // '<', '|', '>', '='
    char kind;        // 'f', 'i', 'u'
    int size;
};

Descr parse_descr(const std::string& descr, const std::string& path) {
    if (descr.size() < 3)
        throw io_error(path + ": unsupported NPY descr '" + descr + "'");
    Descr d;
    d.byte_order = descr[0];
    d.kind = descr[1];
    d.size = std::stoi(descr.substr(2));
    if (d.byte_order == '>')
        throw io_error(path + ": big-endian NPY payloads are not supported");
    if (d.byte_order != '<' && d.byte_order != '|' && d.byte_order != '=')
        throw io_error(path + ": unsupported NPY descr '" + descr + "'");
    if (d.kind != 'f' && d.kind != 'i' && d.kind != 'u')
        throw io_error(path + ": unsupported NPY element kind '" + descr + "'");
    if (d.kind == 'f' && d.size != 4 && d.size != 8)
        throw io_error(path + ": unsupported float width in '" + descr + "'");
    if (d.kind != 'f' && d.size != 1 && d.size != 2 && d.size != 4 && d.size != 8)
        throw io_error(path + ": unsupported integer width in '" + descr + "'");
    return d;
}

template <typename T>
void read_payload(std::ifstream& in, std::int64_t count, const std::string& path,
                  NpyArray& out) {
    std::vector<T> buffer(static_cast<std::size_t>(count));
    in.read(reinterpret_cast<char*>(buffer.data()),
            static_cast<std::streamsize>(count * static_cast<std::int64_t>(sizeof(T))));
    if (!in) throw io_error(path + ": truncated NPY payload");
    if (out.is_integer) {
        out.ints.resize(buffer.size());
        for (std::size_t i = 0; i < buffer.size(); ++i)
            out.ints[i] = static_cast<std::int64_t>(buffer[i]);
    } else {
        out.reals.resize(buffer.size());
        for (std::size_t i = 0; i < buffer.size(); ++i)
            out.reals[i] = static_cast<double>(buffer[i]);
    }
}

void write_npy(const std::string& path, const std::vector<std::int64_t>& shape,
               const char* descr, const void* data, std::size_t elem_size) {
    std::ostringstream dict;
    dict << "{'descr': '" << descr << "', 'fortran_order': False, 'shape': (";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        dict << shape[i];
        if (shape.size() == 1 || i + 1 < shape.size()) dict << ",";
        if (i + 1 < shape.size()) dict << " ";
    }
    dict << "), }";
    std::string header = dict.str();
    // Magic (6) + version (2) + length field (2) + header must be 64-aligned.
    std::size_t unpadded = 10 + header.size() + 1;
    std::size_t padded = (unpadded + 63) / 64 * 64;
    header.append(padded - unpadded, ' ');
    header.push_back('\n');

    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(path + ": cannot open for writing");
    out.write(kMagic, 6);
    out.put('\x01');
    out.put('\x00');
    std::uint16_t len = static_cast<std::uint16_t>(header.size());
    char len_bytes[2] = {static_cast<char>(len & 0xff), static_cast<char>(len >> 8)};
    out.write(len_bytes, 2);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    std::int64_t count = 1;
    for (auto s : shape) count *= s;
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(static_cast<std::size_t>(count) * elem_size));
    if (!out) throw io_error(path + ": write failed");
}

}  // namespace

NpyArray load_npy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(path + ": cannot open file");

    char magic[6];
    in.read(magic, 6);
    if (!in || std::memcmp(magic, kMagic, 6) != 0)
        throw io_error(path + ": not an NPY file (bad magic)");
    char version[2];
    in.read(version, 2);
    if (!in || version[0] != 1 || version[1] != 0)
        throw io_error(path + ": unsupported NPY version (expected 1.0)");
    unsigned char len_bytes[2];
    in.read(reinterpret_cast<char*>(len_bytes), 2);
    if (!in) throw io_error(path + ": truncated NPY header");
    std::size_t header_len = static_cast<std::size_t>(len_bytes[0]) |
                             (static_cast<std::size_t>(len_bytes[1]) << 8);
    std::string header(header_len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw io_error(path + ": truncated NPY header");

    std::string order = header_string(header, "fortran_order", path);
    if (order.find("True") != std::string::npos)
        throw io_error(path + ": fortran_order arrays are not supported");

    Descr descr = parse_descr(header_string(header, "descr", path), path);
    NpyArray out;
    out.shape = parse_shape(header, path);
    out.is_integer = descr.kind != 'f';
    std::int64_t count = out.element_count();

    if (descr.kind == 'f') {
        if (descr.size == 8)
            read_payload<double>(in, count, path, out);
        else
            read_payload<float>(in, count, path, out);
    } else if (descr.kind == 'i') {
        switch (descr.size) {
            case 1: read_payload<std::int8_t>(in, count, path, out); break;
            case 2: read_payload<std::int16_t>(in, count, path, out); break;
            case 4: read_payload<std::int32_t>(in, count, path, out); break;
            default: read_payload<std::int64_t>(in, count, path, out); break;
        }
    } else {
        switch (descr.size) {
            case 1: read_payload<std::uint8_t>(in, count, path, out); break;
            case 2: read_payload<std::uint16_t>(in, count, path, out); break;
            case 4: read_payload<std::uint32_t>(in, count, path, out); break;
            default: read_payload<std::uint64_t>(in, count, path, out); break;
        }
    }
    return out;
}

void save_npy(const std::string& path, const std::vector<std::int64_t>& shape,
              const double* data) {
    write_npy(path, shape, "<f8", data, sizeof(double));
}

void save_npy(const std::string& path, const std::vector<std::int64_t>& shape,
              const std::int64_t* data) {
    write_npy(path, shape, "<i8", data, sizeof(std::int64_t));
}

}  // namespace srland
