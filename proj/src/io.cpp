#include "sunaa/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sunaa {

namespace {

constexpr char kMagic[4] = {'S', 'M', 'X', '1'};
constexpr std::size_t kHeaderBytes = 13;

void put_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f64le(std::string& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
}

double get_f64le(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(p[k]) << (8 * k);
    return std::bit_cast<double>(bits);
}

std::vector<unsigned char> read_all_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoError::Kind::FileMissing, "cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

void write_all_bytes(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(IoError::Kind::WriteFailure, "cannot create " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError(IoError::Kind::WriteFailure, "short write to " + path.string());
}

bool parse_cell(std::string_view cell, double& out) {
    std::size_t lo = 0, hi = cell.size();
    while (lo < hi && (cell[lo] == ' ' || cell[lo] == '\t')) ++lo;
    while (hi > lo && (cell[hi - 1] == ' ' || cell[hi - 1] == '\t')) --hi;
    if (lo == hi) return false;
    const char* first = cell.data() + lo;
    const char* last = cell.data() + hi;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

}  // namespace

Mat read_smx(const std::filesystem::path& path) {
    const auto bytes = read_all_bytes(path);
    if (bytes.size() < kHeaderBytes) {
        throw IoError(IoError::Kind::TruncatedPayload, path.string() + ": header truncated");
    }
    for (int k = 0; k < 4; ++k) {
        if (static_cast<char>(bytes[k]) != kMagic[k]) {
            throw IoError(IoError::Kind::BadMagic, path.string() + ": bad magic, not an SMX1 file");
        }
    }
    if (bytes[4] != 0) {
        throw IoError(IoError::Kind::UnsupportedDtype,
                      path.string() + ": unsupported dtype " + std::to_string(bytes[4]));
    }
    const std::uint32_t rows = get_u32le(bytes.data() + 5);
    const std::uint32_t cols = get_u32le(bytes.data() + 9);
    if (rows == 0 || cols == 0) {
        throw IoError(IoError::Kind::EmptyMatrix, path.string() + ": zero-sized matrix");
    }
    const std::uint64_t payload = static_cast<std::uint64_t>(rows) * cols * 8;
    if (bytes.size() < kHeaderBytes + payload) {
        throw IoError(IoError::Kind::TruncatedPayload, path.string() + ": truncated payload");
    }
    if (bytes.size() > kHeaderBytes + payload) {
        throw IoError(IoError::Kind::TrailingBytes, path.string() + ": trailing bytes after payload");
    }
    Mat m(rows, cols);
    const unsigned char* p = bytes.data() + kHeaderBytes;
    for (std::uint32_t i = 0; i < rows; ++i) {
        for (std::uint32_t j = 0; j < cols; ++j, p += 8) m(i, j) = get_f64le(p);
    }
    return m;
}

void write_smx(const std::filesystem::path& path, const Mat& m) {
    if (m.empty()) throw IoError(IoError::Kind::EmptyMatrix, "write_smx: empty matrix");
    if (!m.all_finite()) {
        throw IoError(IoError::Kind::NonFinite, "write_smx: matrix has non-finite values");
    }
    if (m.rows() > 0xffffffffULL || m.cols() > 0xffffffffULL) {
        throw IoError(IoError::Kind::DimensionMismatch, "write_smx: dimensions exceed u32 range");
    }
    std::string out;
    out.reserve(kHeaderBytes + m.size() * 8);
    out.append(kMagic, 4);
    out.push_back(0);
    put_u32le(out, static_cast<std::uint32_t>(m.rows()));
    put_u32le(out, static_cast<std::uint32_t>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) put_f64le(out, m(i, j));
    }
    write_all_bytes(path, out);
}

Mat read_csv_matrix(const std::filesystem::path& path) {
    const auto bytes = read_all_bytes(path);
    std::vector<std::vector<std::string_view>> rows;
    const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = eol + 1;
        if (line.empty() && pos >= text.size()) break;  // trailing newline
        std::vector<std::string_view> cells;
        std::size_t cpos = 0;
        while (true) {
            const std::size_t comma = line.find(',', cpos);
            cells.push_back(line.substr(cpos, comma == std::string_view::npos ? line.size() - cpos
                                                                              : comma - cpos));
            if (comma == std::string_view::npos) break;
            cpos = comma + 1;
        }
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw IoError(IoError::Kind::NoData, path.string() + ": no rows");

    std::size_t first = 0;
    double v;
    for (const auto& cell : rows[0]) {
        if (!parse_cell(cell, v)) {
            first = 1;  // non-numeric first row: header
            break;
        }
    }
    if (first >= rows.size()) {
        throw IoError(IoError::Kind::NoData, path.string() + ": header but no data rows");
    }
    const std::size_t n_rows = rows.size() - first;
    const std::size_t n_cols = rows[first].size();
    Mat m(n_rows, n_cols);
    for (std::size_t i = 0; i < n_rows; ++i) {
        const auto& cells = rows[first + i];
        if (cells.size() != n_cols) {
            throw IoError(IoError::Kind::RaggedCsv,
                          path.string() + ": row " + std::to_string(first + i + 1) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(n_cols));
        }
        for (std::size_t j = 0; j < n_cols; ++j) {
            if (!parse_cell(cells[j], v) || !std::isfinite(v)) {
                throw IoError(IoError::Kind::BadCsvCell,
                              path.string() + ": unparsable cell at row " +
                                  std::to_string(first + i + 1) + ", col " + std::to_string(j + 1));
            }
            m(i, j) = v;
        }
    }
    return m;
}

void write_csv_matrix(const std::filesystem::path& path, const Mat& m, std::string_view header) {
    std::string out;
    if (!header.empty()) {
        out.append(header);
        out.push_back('\n');
    }
    char buf[32];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            const int len = std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out.append(buf, static_cast<std::size_t>(len));
            out.push_back(j + 1 < m.cols() ? ',' : '\n');
        }
    }
    write_all_bytes(path, out);
}

std::vector<std::filesystem::path> export_abundance_maps(const Mat& a, std::size_t height,
                                                         std::size_t width,
                                                         const std::filesystem::path& out_dir) {
    if (a.cols() != height * width) {
        throw IoError(IoError::Kind::DimensionMismatch,
                      "export_abundance_maps: height*width does not match pixel count");
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::vector<std::filesystem::path> paths;
    for (std::size_t k = 0; k < a.rows(); ++k) {
        std::string body = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
        body.reserve(body.size() + height * width);
        for (std::size_t pix = 0; pix < height * width; ++pix) {
            const double v = std::clamp(a(k, pix), 0.0, 1.0);
            body.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
        }
        auto path = out_dir / ("abundance_" + std::to_string(k + 1) + ".pgm");
        write_all_bytes(path, body);
        paths.push_back(std::move(path));
    }
    return paths;
}

}  // namespace sunaa
