#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sunaa/mat.hpp"

namespace sunaa {

/// File-format and filesystem failures; `kind` distinguishes the cause so
/// callers can map each to its own diagnostic.
class IoError : public std::runtime_error {
public:
    enum class Kind {
        FileMissing,
        BadMagic,
        UnsupportedDtype,
        TruncatedPayload,
        TrailingBytes,
        EmptyMatrix,
        NonFinite,
        RaggedCsv,
        BadCsvCell,
        NoData,
        DimensionMismatch,
        WriteFailure,
    };

    IoError(Kind kind, std::string message) : std::runtime_error(std::move(message)), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// SMX1: "SMX1" magic, one dtype byte (0 = float64 little-endian), u32le rows,
/// u32le cols, then rows*cols doubles in row-major order. Write-then-read is
/// bit-exact for any finite matrix.
Mat read_smx(const std::filesystem::path& path);
void write_smx(const std::filesystem::path& path, const Mat& m);

/// Rectangular comma-separated numeric file, '.' decimal; a non-numeric first
/// row is treated as a header and skipped.
Mat read_csv_matrix(const std::filesystem::path& path);

/// Writes with 17 significant digits so values round-trip exactly.
void write_csv_matrix(const std::filesystem::path& path, const Mat& m,
                      std::string_view header = {});

/// One binary PGM (P5, maxval 255) per abundance row, named
/// abundance_<k>.pgm with k starting at 1. Pixels map through
/// round(255 * clamp(value, 0, 1)) on an absolute scale so maps stay
/// comparable across runs and methods.
std::vector<std::filesystem::path> export_abundance_maps(const Mat& a, std::size_t height,
                                                         std::size_t width,
                                                         const std::filesystem::path& out_dir);

}  // namespace sunaa
