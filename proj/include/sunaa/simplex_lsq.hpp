#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "sunaa/mat.hpp"

namespace sunaa {

struct SimplexLsqOptions {
    /// Inner-iteration budget; 0 resolves to 10*dimension + 50.
    std::size_t max_inner_iters = 0;
    double kkt_tol = 1e-10;
    /// Support set to start from; ignored when larger than the solver's
    /// warm-support cap (see solve_simplex_lsq_column).
    std::optional<std::vector<std::size_t>> warm_start;
};

struct SimplexSolution {
    std::vector<double> x;                 // on the simplex
    std::vector<std::size_t> support;      // indices with x[i] > 0
    double kkt_multiplier = 0.0;           // equality-constraint multiplier
    std::size_t inner_iters = 0;
    bool certified = false;                // KKT certificate held at exit
};

/// Minimizes ||y - e*x||_2^2 over the probability simplex with a primal
/// active-set method: the equality-constrained KKT system is solved on the
/// working support (regularized by +1e-12 on the Gram diagonal), blocking
/// constraints are dropped at the first infeasible step, and the index with
/// the most negative reduced gradient enters. Ties break to the lowest index,
/// so the solve is deterministic bit-for-bit.
///
/// Warm starts reuse a support set; supports larger than max(p+1, 16) fall
/// back to the cold start (the best single column), since an optimum never
/// needs more than p+1 active columns.
///
/// A solution that exhausts the iteration budget is returned as the best
/// feasible iterate with certified = false rather than an error.
SimplexSolution solve_simplex_lsq_column(std::span<const double> y, const Mat& e,
                                         const SimplexLsqOptions& opts = {});

/// Same solver on precomputed normal-equation inputs: gram = e^T e and
/// atom_targets = e^T y. warm_cap bounds the accepted warm-support size.
SimplexSolution solve_simplex_lsq_gram(const Mat& gram, std::span<const double> atom_targets,
                                       const SimplexLsqOptions& opts = {},
                                       std::size_t warm_cap = std::numeric_limits<std::size_t>::max());

/// Columnwise solve of targets (p x k) against dictionary e (p x r); column j
/// of the result solves column j of targets. Columns are independent, so they
/// may fan out over `threads` workers; outputs do not depend on the thread
/// count. A warm matrix (r x k) supplies per-column warm supports (its
/// strictly positive entries). `uncertified` (when non-null) accumulates the
/// number of budget-exhausted columns. Per-column failures are rethrown with
/// the column index attached.
Mat solve_simplex_lsq_batch(const Mat& targets, const Mat& e, const SimplexLsqOptions& opts = {},
                            const Mat* warm = nullptr, unsigned threads = 1,
                            std::size_t* uncertified = nullptr);

}  // namespace sunaa
