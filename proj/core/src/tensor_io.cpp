#include "prequant/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace prequant {

static_assert(std::endian::native == std::endian::little,
              "tensor_io assumes a little-endian host");

namespace {

constexpr char kNpyMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

std::string offset_str(std::size_t off) {
    return " (at byte " + std::to_string(off) + ")";
}

// Pulls the value substring for `key` out of the header dict. The header
// numpy writes is a flat Python dict literal; a lightweight scan is enough.
std::string dict_value(const std::string& header, const std::string& key,
                       const std::string& path) {
    const std::string quoted = "'" + key + "'";
    const std::size_t kpos = header.find(quoted);
    if (kpos == std::string::npos) {
        throw NpyHeaderError(path + ": header missing key " + quoted + offset_str(10));
    }
    std::size_t pos = header.find(':', kpos + quoted.size());
    if (pos == std::string::npos) {
        throw NpyHeaderError(path + ": malformed header dict" + offset_str(10 + kpos));
    }
    ++pos;
    while (pos < header.size() && header[pos] == ' ') {
        ++pos;
    }
    std::size_t end;
    if (pos < header.size() && header[pos] == '\'') {
        end = header.find('\'', pos + 1);
        if (end == std::string::npos) {
            throw NpyHeaderError(path + ": unterminated string in header" + offset_str(10 + pos));
        }
        return header.substr(pos + 1, end - pos - 1);
    }
    if (pos < header.size() && header[pos] == '(') {
        end = header.find(')', pos);
        if (end == std::string::npos) {
            throw NpyHeaderError(path + ": unterminated tuple in header" + offset_str(10 + pos));
        }
        return header.substr(pos, end - pos + 1);
    }
    end = header.find_first_of(",}", pos);
    if (end == std::string::npos) {
        throw NpyHeaderError(path + ": malformed header value" + offset_str(10 + pos));
    }
    return header.substr(pos, end - pos);
}

std::vector<std::size_t> parse_shape(const std::string& tuple, const std::string& path) {
    std::vector<std::size_t> dims;
    std::string inner = tuple.substr(1, tuple.size() - 2); // strip parens
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t begin = item.find_first_not_of(' ');
        if (begin == std::string::npos) {
            continue; // trailing comma of a 1-tuple
        }
        try {
            dims.push_back(static_cast<std::size_t>(std::stoull(item.substr(begin))));
        } catch (const std::exception&) {
            throw NpyHeaderError(path + ": unparseable shape entry '" + item + "'" + offset_str(10));
        }
    }
    return dims;
}

} // namespace

Tensor2D load_npy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path + ": cannot open for reading");
    }

    char magic[8];
    if (!in.read(magic, 8)) {
        throw NpyHeaderError(path + ": truncated magic" + offset_str(0));
    }
    if (std::memcmp(magic, kNpyMagic, 6) != 0) {
        throw NpyHeaderError(path + ": bad magic" + offset_str(0));
    }
    if (magic[6] != 1 || magic[7] != 0) {
        throw NpyHeaderError(path + ": unsupported NPY version " +
                             std::to_string(int(magic[6])) + "." + std::to_string(int(magic[7])) +
                             offset_str(6));
    }

    std::uint8_t len_bytes[2];
    if (!in.read(reinterpret_cast<char*>(len_bytes), 2)) {
        throw NpyHeaderError(path + ": truncated header length" + offset_str(8));
    }
    const std::size_t header_len = len_bytes[0] | (std::size_t(len_bytes[1]) << 8);

    std::string header(header_len, '\0');
    if (!in.read(header.data(), static_cast<std::streamsize>(header_len))) {
        throw NpyHeaderError(path + ": truncated header" + offset_str(10));
    }

    const std::string descr = dict_value(header, "descr", path);
    const std::string fortran = dict_value(header, "fortran_order", path);
    const std::string shape_str = dict_value(header, "shape", path);

    if (fortran != "False") {
        throw NpyHeaderError(path + ": fortran_order arrays unsupported, expected C order" +
                             offset_str(10));
    }
    std::size_t item_size;
    if (descr == "<f8") {
        item_size = 8;
    } else if (descr == "<f4") {
        item_size = 4;
    } else {
        throw NpyDtypeError(path + ": unsupported dtype '" + descr +
                            "', expected little-endian <f4 or <f8" + offset_str(10));
    }

    const std::vector<std::size_t> dims = parse_shape(shape_str, path);
    if (dims.size() != 2) {
        throw NpyRankError(path + ": expected rank 2, got rank " + std::to_string(dims.size()) +
                           offset_str(10));
    }
    const std::size_t rows = dims[0], cols = dims[1];
    const std::size_t count = rows * cols;
    const std::size_t data_off = 10 + header_len;

    std::vector<double> data(count);
    if (item_size == 8) {
        if (!in.read(reinterpret_cast<char*>(data.data()),
                     static_cast<std::streamsize>(count * 8))) {
            throw NpyHeaderError(path + ": truncated payload, expected " +
                                 std::to_string(count * 8) + " bytes" + offset_str(data_off));
        }
    } else {
        std::vector<float> raw(count);
        if (!in.read(reinterpret_cast<char*>(raw.data()),
                     static_cast<std::streamsize>(count * 4))) {
            throw NpyHeaderError(path + ": truncated payload, expected " +
                                 std::to_string(count * 4) + " bytes" + offset_str(data_off));
        }
        for (std::size_t i = 0; i < count; ++i) {
            data[i] = static_cast<double>(raw[i]); // exact widening
        }
    }
    return Tensor2D(rows, cols, std::move(data));
}

void save_npy(const Tensor2D& x, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError(path + ": cannot open for writing");
    }
    std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                       std::to_string(x.rows()) + ", " + std::to_string(x.cols()) + "), }";
    const std::size_t unpadded = 10 + dict.size() + 1;
    const std::size_t padded = (unpadded + 63) / 64 * 64;
    dict.append(padded - unpadded, ' ');
    dict.push_back('\n');

    out.write(kNpyMagic, 6);
    out.put('\x01');
    out.put('\x00');
    const std::size_t header_len = dict.size();
    out.put(static_cast<char>(header_len & 0xFF));
    out.put(static_cast<char>((header_len >> 8) & 0xFF));
    out.write(dict.data(), static_cast<std::streamsize>(dict.size()));
    out.write(reinterpret_cast<const char*>(x.data().data()),
              static_cast<std::streamsize>(x.size() * sizeof(double)));
    if (!out) {
        throw IoError(path + ": write failed");
    }
}

Tensor2D load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(path + ": cannot open for reading");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError(path + ": empty file, expected header row");
    }
    std::size_t cols = 1;
    for (char ch : line) {
        if (ch == ',') {
            ++cols;
        }
    }
    std::vector<double> data;
    std::size_t rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::size_t row_cols = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                data.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IoError(path + ": unparseable value '" + cell + "' on line " +
                              std::to_string(line_no));
            }
            ++row_cols;
        }
        if (row_cols != cols) {
            throw IoError(path + ": line " + std::to_string(line_no) + " has " +
                          std::to_string(row_cols) + " values, expected " + std::to_string(cols));
        }
        ++rows;
    }
    if (rows == 0) {
        throw IoError(path + ": no data rows");
    }
    return Tensor2D(rows, cols, std::move(data));
}

void save_csv(const Tensor2D& x, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError(path + ": cannot open for writing");
    }
    for (std::size_t c = 0; c < x.cols(); ++c) {
        out << (c ? "," : "") << "c" << c;
    }
    out << "\n";
    char buf[32];
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", x(r, c));
            out << (c ? "," : "") << buf;
        }
        out << "\n";
    }
    if (!out) {
        throw IoError(path + ": write failed");
    }
}

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

Tensor2D load_tensor(const std::string& path) {
    if (has_suffix(path, ".npy")) {
        return load_npy(path);
    }
    if (has_suffix(path, ".csv")) {
        return load_csv(path);
    }
    throw IoError(path + ": unsupported tensor format, expected .npy or .csv");
}

void save_tensor(const Tensor2D& x, const std::string& path) {
    if (has_suffix(path, ".npy")) {
        save_npy(x, path);
    } else if (has_suffix(path, ".csv")) {
        save_csv(x, path);
    } else {
        throw IoError(path + ": unsupported tensor format, expected .npy or .csv");
    }
}

} // namespace prequant
