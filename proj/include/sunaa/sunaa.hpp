#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>

#include "sunaa/mat.hpp"
#include "sunaa/simplex_lsq.hpp"
#include "sunaa/types.hpp"

namespace sunaa {

struct SunaaConfig {
    std::size_t rank = 0;               // number of scene endmembers r
    std::size_t outer_iters = 100;      // T
    double rel_obj_tol = 1e-8;          // early stop on relative objective decrease
    std::uint64_t seed = 0;             // reserved; the default path is deterministic and seed-free
    SimplexLsqOptions solver_opts;
    unsigned threads = 1;               // abundance-step fan-out; 0 = hardware concurrency
};

/// Uniform initialization: B filled with 1/m, A filled with 1/r.
std::pair<ContributionMatrix, AbundanceMatrix> init_uniform(std::size_t m, std::size_t r,
                                                            std::size_t n);

/// Squared Frobenius norm of Y - D*B*A.
double objective(const Mat& y, const Mat& d, const Mat& b, const Mat& a);

/// Abundance update: solves the simplex least-squares problem per pixel
/// against E = D*B. A warm abundance matrix supplies per-pixel start supports.
AbundanceMatrix a_step(const Mat& y, const Mat& d, const ContributionMatrix& b,
                       const AbundanceMatrix* warm, const SimplexLsqOptions& opts,
                       unsigned threads = 1, std::size_t* uncertified = nullptr);

/// Called after each contribution-column update with the full objective;
/// used by instrumented runs only.
using BStepObserver = std::function<void(std::size_t column, double objective)>;

/// Contribution update: sequential coordinate descent over the columns of B.
/// Column j is refit against the rank-one deflated target built from the
/// current (partially updated) B; columns whose abundance row has (near) zero
/// norm are skipped. gram_d, when provided, must equal gram(d).
ContributionMatrix b_step(const Mat& y, const Mat& d, const ContributionMatrix& b_old,
                          const AbundanceMatrix& a, const SimplexLsqOptions& opts,
                          const Mat* gram_d = nullptr, const BStepObserver& observer = {},
                          std::size_t* uncertified = nullptr);

/// Full alternating fit: uniform init, then up to cfg.outer_iters rounds of
/// a_step followed by b_step, recording the objective after each round and
/// stopping early once the relative decrease falls below cfg.rel_obj_tol.
FitResult fit(const DataCube& y, const SpectralLibrary& d, const SunaaConfig& cfg);

/// Blind variant: the pixels themselves serve as the dictionary, so the
/// contribution matrix has one row per pixel.
FitResult fit_blind_aa(const DataCube& y, const SunaaConfig& cfg);

/// Removes one abundance row and rescales the remaining columns to sum to
/// one; columns that carried all their weight on the dropped row become
/// uniform over the remaining endmembers.
AbundanceMatrix drop_and_renormalize(const AbundanceMatrix& a, std::size_t index);

}  // namespace sunaa
