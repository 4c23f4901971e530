#pragma once

#include <cstddef>
#include <vector>

#include "sunaa/mat.hpp"

namespace sunaa {

/// SRE values are capped here so reports stay finite on exact matches.
inline constexpr double kSreCapDb = 300.0;

/// Matching between estimated and reference endmember slots: perm[j] is the
/// reference slot assigned to estimated slot j; score is the mean correlation
/// of the matched pairs.
struct Alignment {
    std::vector<std::size_t> perm;
    double score = 0.0;
};

/// Signal-to-reconstruction error 20*log10(||X||_F / ||X - Xhat||_F) in dB,
/// capped at kSreCapDb. Throws on shape mismatch or all-zero reference.
double sre_db(const Mat& x_true, const Mat& x_hat);

/// Greedy maximum-correlation matching of estimated columns to reference
/// columns (normalized inner products; zero-norm columns correlate as 0).
/// Deterministic: ties break to the lowest index pair.
Alignment align_endmembers(const Mat& e_true, const Mat& e_hat);

/// SRE after permuting the rows of x_hat by the alignment.
double aligned_sre_db(const Mat& x_true, const Mat& x_hat, const Alignment& alignment);

}  // namespace sunaa
