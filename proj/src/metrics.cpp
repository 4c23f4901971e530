#include "sunaa/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace sunaa {

double sre_db(const Mat& x_true, const Mat& x_hat) {
    if (x_true.rows() != x_hat.rows() || x_true.cols() != x_hat.cols()) {
        throw std::invalid_argument("sre_db: shapes differ");
    }
    const double signal = frobenius_norm(x_true);
    if (signal == 0.0) throw std::invalid_argument("sre_db: reference matrix is zero");
    double err_sq = 0.0;
    for (std::size_t k = 0; k < x_true.size(); ++k) {
        const double d = x_true.data()[k] - x_hat.data()[k];
        err_sq += d * d;
    }
    if (err_sq == 0.0) return kSreCapDb;
    const double value = 20.0 * std::log10(signal / std::sqrt(err_sq));
    return std::min(value, kSreCapDb);
}

Alignment align_endmembers(const Mat& e_true, const Mat& e_hat) {
    if (e_true.rows() != e_hat.rows() || e_true.cols() != e_hat.cols()) {
        throw std::invalid_argument("align_endmembers: shapes differ");
    }
    const std::size_t r = e_true.cols();
    Mat corr(r, r);
    std::vector<double> tn(r), hn(r);
    for (std::size_t i = 0; i < r; ++i) tn[i] = std::sqrt(dot(e_true.col_span(i), e_true.col_span(i)));
    for (std::size_t j = 0; j < r; ++j) hn[j] = std::sqrt(dot(e_hat.col_span(j), e_hat.col_span(j)));
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < r; ++j) {
            const double denom = tn[i] * hn[j];
            corr(i, j) =
                denom == 0.0 ? 0.0 : dot(e_true.col_span(i), e_hat.col_span(j)) / denom;
        }
    }

    Alignment out;
    out.perm.assign(r, r);
    std::vector<bool> true_used(r, false), hat_used(r, false);
    double total = 0.0;
    for (std::size_t round = 0; round < r; ++round) {
        std::size_t bi = r, bj = r;
        double best = -2.0;
        for (std::size_t i = 0; i < r; ++i) {
            if (true_used[i]) continue;
            for (std::size_t j = 0; j < r; ++j) {
                if (hat_used[j]) continue;
                if (corr(i, j) > best) {
                    best = corr(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        true_used[bi] = true;
        hat_used[bj] = true;
        out.perm[bj] = bi;
        total += best;
    }
    out.score = total / static_cast<double>(r);
    return out;
}

double aligned_sre_db(const Mat& x_true, const Mat& x_hat, const Alignment& alignment) {
    if (alignment.perm.size() != x_hat.rows()) {
        throw std::invalid_argument("aligned_sre_db: alignment size does not match row count");
    }
    std::vector<bool> seen(alignment.perm.size(), false);
    for (std::size_t v : alignment.perm) {
        if (v >= alignment.perm.size() || seen[v]) {
            throw std::invalid_argument("aligned_sre_db: alignment is not a permutation");
        }
        seen[v] = true;
    }
    Mat permuted(x_hat.rows(), x_hat.cols());
    for (std::size_t j = 0; j < x_hat.cols(); ++j) {
        const double* src = x_hat.col(j);
        double* dst = permuted.col(j);
        for (std::size_t i = 0; i < x_hat.rows(); ++i) dst[alignment.perm[i]] = src[i];
    }
    return sre_db(x_true, permuted);
}

}  // namespace sunaa
