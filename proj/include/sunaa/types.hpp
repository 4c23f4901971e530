#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sunaa/mat.hpp"

namespace sunaa {

/// Repo-wide constraint tolerances: entries of simplex-constrained factors may
/// round to -kNegativityTol, and column sums must match 1 within kSumTol.
inline constexpr double kNegativityTol = 1e-12;
inline constexpr double kSumTol = 1e-9;

/// Dictionary of candidate endmember spectra, one per column (bands x count).
class SpectralLibrary {
public:
    explicit SpectralLibrary(Mat d, std::optional<std::vector<std::string>> names = std::nullopt);

    const Mat& mat() const { return d_; }
    std::size_t bands() const { return d_.rows(); }
    std::size_t count() const { return d_.cols(); }
    const std::optional<std::vector<std::string>>& names() const { return names_; }

private:
    Mat d_;
    std::optional<std::vector<std::string>> names_;
};

/// Observed pixel spectra (bands x pixels) with the spatial extent they came
/// from; pixels are ordered row-major over the image (column j = row*width + col).
class DataCube {
public:
    DataCube(Mat y, std::size_t height, std::size_t width);

    const Mat& mat() const { return y_; }
    std::size_t bands() const { return y_.rows(); }
    std::size_t pixels() const { return y_.cols(); }
    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }

private:
    Mat y_;
    std::size_t height_;
    std::size_t width_;
};

/// Library-to-endmember contribution matrix B (library_size x rank); every
/// column lies on the probability simplex.
class ContributionMatrix {
public:
    explicit ContributionMatrix(Mat b);

    const Mat& mat() const { return b_; }
    std::size_t library_size() const { return b_.rows(); }
    std::size_t rank() const { return b_.cols(); }

private:
    Mat b_;
};

/// Per-pixel fractional abundances A (rank x pixels); every column lies on the
/// probability simplex.
class AbundanceMatrix {
public:
    explicit AbundanceMatrix(Mat a);

    const Mat& mat() const { return a_; }
    std::size_t rank() const { return a_.rows(); }
    std::size_t pixels() const { return a_.cols(); }

private:
    Mat a_;
};

/// Converged factors plus the per-outer-iteration objective trace.
struct FitResult {
    ContributionMatrix b;
    AbundanceMatrix a;
    Mat e;  // bands x rank, equals library * b
    std::vector<double> objective_trace;
    std::size_t iterations_run = 0;
    bool converged_early = false;
    std::size_t uncertified_solves = 0;
};

/// Throws std::invalid_argument unless every column of m sums to 1 within
/// kSumTol and has no entry below -kNegativityTol.
void require_columnwise_simplex(const Mat& m, const char* what);

}  // namespace sunaa
