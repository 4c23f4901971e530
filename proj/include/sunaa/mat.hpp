#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sunaa {

/// Dense column-major matrix of 64-bit floats. The single storage type used
/// throughout the library; per-column views are contiguous, which is what both
/// the pixel-wise and the factor-column subproblems iterate over.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

    double* col(std::size_t j) { return data_.data() + j * rows_; }
    const double* col(std::size_t j) const { return data_.data() + j * rows_; }
    std::span<double> col_span(std::size_t j) { return {col(j), rows_}; }
    std::span<const double> col_span(std::size_t j) const { return {col(j), rows_}; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool all_finite() const;

    friend bool operator==(const Mat& a, const Mat& b) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Builds a matrix from a row-major value sequence (the interchange order).
/// Throws std::invalid_argument on length mismatch or non-finite entries.
Mat mat_from_rows(std::size_t rows, std::size_t cols, std::span<const double> values);

double frobenius_norm(const Mat& x);
double frobenius_norm_sq(const Mat& x);

/// out = a*b; shapes must conform.
Mat multiply(const Mat& a, const Mat& b);
void multiply_into(Mat& out, const Mat& a, const Mat& b);

/// Gram matrix e^T e (symmetric, cols x cols).
Mat gram(const Mat& e);

/// r = y - e*a, the model residual; shapes p x n, p x r, r x n.
void residual_into(Mat& r, const Mat& y, const Mat& e, const Mat& a);

std::vector<double> mat_vec(const Mat& a, std::span<const double> x);
std::vector<double> matT_vec(const Mat& a, std::span<const double> y);

double dot(std::span<const double> a, std::span<const double> b);

/// Throws std::invalid_argument naming `what` if x has NaN/Inf entries.
void require_finite(const Mat& x, const char* what);

}  // namespace sunaa
