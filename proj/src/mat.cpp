#include "sunaa/mat.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sunaa {

Mat::Mat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("Mat: rows and cols must be >= 1");
    }
}

bool Mat::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Mat mat_from_rows(std::size_t rows, std::size_t cols, std::span<const double> values) {
    if (values.size() != rows * cols) {
        throw std::invalid_argument("mat_from_rows: expected " + std::to_string(rows * cols) +
                                    " values, got " + std::to_string(values.size()));
    }
    Mat m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const double v = values[i * cols + j];
            if (!std::isfinite(v)) {
                throw std::invalid_argument("mat_from_rows: non-finite entry at row " +
                                            std::to_string(i) + ", col " + std::to_string(j));
            }
            m(i, j) = v;
        }
    }
    return m;
}

double frobenius_norm_sq(const Mat& x) {
    double acc = 0.0;
    const double* p = x.data();
    for (std::size_t k = 0; k < x.size(); ++k) acc += p[k] * p[k];
    return acc;
}

double frobenius_norm(const Mat& x) { return std::sqrt(frobenius_norm_sq(x)); }

void multiply_into(Mat& out, const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("multiply: inner dimensions differ");
    if (out.rows() != a.rows() || out.cols() != b.cols()) {
        throw std::invalid_argument("multiply: output shape mismatch");
    }
    const std::size_t p = a.rows(), k = a.cols(), n = b.cols();
    for (std::size_t j = 0; j < n; ++j) {
        double* outj = out.col(j);
        for (std::size_t i = 0; i < p; ++i) outj[i] = 0.0;
        const double* bj = b.col(j);
        for (std::size_t l = 0; l < k; ++l) {
            const double w = bj[l];
            if (w == 0.0) continue;
            const double* al = a.col(l);
            for (std::size_t i = 0; i < p; ++i) outj[i] += w * al[i];
        }
    }
}

Mat multiply(const Mat& a, const Mat& b) {
    Mat out(a.rows(), b.cols());
    multiply_into(out, a, b);
    return out;
}

Mat gram(const Mat& e) {
    const std::size_t m = e.cols();
    Mat g(m, m);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i <= j; ++i) {
            const double v = dot(e.col_span(i), e.col_span(j));
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

void residual_into(Mat& r, const Mat& y, const Mat& e, const Mat& a) {
    if (y.rows() != e.rows() || e.cols() != a.rows() || a.cols() != y.cols()) {
        throw std::invalid_argument("residual: shapes do not conform");
    }
    const std::size_t p = y.rows(), n = y.cols(), k = e.cols();
    if (r.rows() != p || r.cols() != n) r = Mat(p, n);
    for (std::size_t j = 0; j < n; ++j) {
        double* rj = r.col(j);
        const double* yj = y.col(j);
        for (std::size_t i = 0; i < p; ++i) rj[i] = yj[i];
        const double* aj = a.col(j);
        for (std::size_t l = 0; l < k; ++l) {
            const double w = aj[l];
            if (w == 0.0) continue;
            const double* el = e.col(l);
            for (std::size_t i = 0; i < p; ++i) rj[i] -= w * el[i];
        }
    }
}

std::vector<double> mat_vec(const Mat& a, std::span<const double> x) {
    if (x.size() != a.cols()) throw std::invalid_argument("mat_vec: length mismatch");
    std::vector<double> out(a.rows(), 0.0);
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const double w = x[j];
        if (w == 0.0) continue;
        const double* aj = a.col(j);
        for (std::size_t i = 0; i < a.rows(); ++i) out[i] += w * aj[i];
    }
    return out;
}

std::vector<double> matT_vec(const Mat& a, std::span<const double> y) {
    if (y.size() != a.rows()) throw std::invalid_argument("matT_vec: length mismatch");
    std::vector<double> out(a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] = dot(a.col_span(j), y);
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

void require_finite(const Mat& x, const char* what) {
    if (!x.all_finite()) {
        throw std::invalid_argument(std::string(what) + ": matrix has non-finite entries");
    }
}

}  // namespace sunaa
