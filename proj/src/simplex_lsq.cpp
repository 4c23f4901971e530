#include "sunaa/simplex_lsq.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

namespace sunaa {

namespace {

constexpr double kGramRegularization = 1e-12;

/// Cholesky factorization of a into lower-triangular l (in place, column-major
/// s x s buffer). Returns false on a non-positive pivot.
bool cholesky(std::vector<double>& a, std::size_t s) {
    for (std::size_t j = 0; j < s; ++j) {
        double d = a[j * s + j];
        for (std::size_t k = 0; k < j; ++k) {
            const double l = a[k * s + j];
            d -= l * l;
        }
        if (!(d > 0.0)) return false;
        const double root = std::sqrt(d);
        a[j * s + j] = root;
        for (std::size_t i = j + 1; i < s; ++i) {
            double v = a[j * s + i];
            for (std::size_t k = 0; k < j; ++k) v -= a[k * s + i] * a[k * s + j];
            a[j * s + i] = v / root;
        }
    }
    return true;
}

void cholesky_solve(const std::vector<double>& l, std::size_t s, std::vector<double>& b) {
    for (std::size_t i = 0; i < s; ++i) {
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) v -= l[k * s + i] * b[k];
        b[i] = v / l[i * s + i];
    }
    for (std::size_t ii = s; ii-- > 0;) {
        double v = b[ii];
        for (std::size_t k = ii + 1; k < s; ++k) v -= l[ii * s + k] * b[k];
        b[ii] = v / l[ii * s + ii];
    }
}

/// Equality-constrained solve on the support: minimize x^T G x / 2 - c^T x
/// subject to sum(x) = 1, via the Schur complement of the regularized Gram
/// block. Returns false only if factorization fails at every regularization
/// level tried.
bool kkt_solve(const Mat& gram, std::span<const double> c, const std::vector<std::size_t>& support,
               std::vector<double>& x_out, double& mu_out) {
    const std::size_t s = support.size();
    std::vector<double> block(s * s);
    std::vector<double> u(s), v(s);
    double reg = kGramRegularization;
    for (int attempt = 0; attempt < 3; ++attempt, reg *= 100.0) {
        for (std::size_t j = 0; j < s; ++j) {
            const double* gcol = gram.col(support[j]);
            for (std::size_t i = 0; i < s; ++i) block[j * s + i] = gcol[support[i]];
            block[j * s + j] += reg;
        }
        if (!cholesky(block, s)) continue;
        for (std::size_t i = 0; i < s; ++i) {
            u[i] = c[support[i]];
            v[i] = 1.0;
        }
        cholesky_solve(block, s, u);
        cholesky_solve(block, s, v);
        double sum_u = 0.0, sum_v = 0.0;
        for (std::size_t i = 0; i < s; ++i) {
            sum_u += u[i];
            sum_v += v[i];
        }
        if (sum_v == 0.0 || !std::isfinite(sum_v) || !std::isfinite(sum_u)) continue;
        const double mu = (1.0 - sum_u) / sum_v;
        x_out.resize(s);
        bool finite = true;
        for (std::size_t i = 0; i < s; ++i) {
            x_out[i] = u[i] + mu * v[i];
            finite = finite && std::isfinite(x_out[i]);
        }
        if (!finite) continue;
        mu_out = mu;
        return true;
    }
    return false;
}

/// g = G x - c restricted to the sparse iterate (x nonzero only on support).
void gradient(const Mat& gram, std::span<const double> c, const std::vector<std::size_t>& support,
              const std::vector<double>& x, std::vector<double>& g) {
    const std::size_t m = gram.rows();
    g.assign(m, 0.0);
    for (std::size_t k : support) {
        const double w = x[k];
        if (w == 0.0) continue;
        const double* gcol = gram.col(k);
        for (std::size_t i = 0; i < m; ++i) g[i] += w * gcol[i];
    }
    for (std::size_t i = 0; i < m; ++i) g[i] -= c[i];
}

std::vector<std::size_t> positive_support(const std::vector<double>& x) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0) s.push_back(i);
    }
    return s;
}

}  // namespace

SimplexSolution solve_simplex_lsq_gram(const Mat& gram, std::span<const double> atom_targets,
                                       const SimplexLsqOptions& opts, std::size_t warm_cap) {
    const std::size_t m = gram.rows();
    if (gram.cols() != m) throw std::invalid_argument("simplex_lsq: gram matrix not square");
    if (atom_targets.size() != m) throw std::invalid_argument("simplex_lsq: target length mismatch");
    if (!(opts.kkt_tol > 0.0)) throw std::invalid_argument("simplex_lsq: kkt_tol must be > 0");
    const std::size_t budget = opts.max_inner_iters ? opts.max_inner_iters : 10 * m + 50;

    std::vector<std::size_t> support;
    if (opts.warm_start && !opts.warm_start->empty() && opts.warm_start->size() <= warm_cap) {
        support = *opts.warm_start;
        std::sort(support.begin(), support.end());
        support.erase(std::unique(support.begin(), support.end()), support.end());
        if (!support.empty() && support.back() >= m) {
            throw std::invalid_argument("simplex_lsq: warm-start index out of range");
        }
    }
    if (support.empty()) {
        // Cold start: the single column closest to y, i.e. argmin G_ii - 2 c_i.
        std::size_t best = 0;
        double best_val = gram(0, 0) - 2.0 * atom_targets[0];
        for (std::size_t i = 1; i < m; ++i) {
            const double val = gram(i, i) - 2.0 * atom_targets[i];
            if (val < best_val) {
                best_val = val;
                best = i;
            }
        }
        support.push_back(best);
    }

    std::vector<double> x(m, 0.0);
    const double w0 = 1.0 / static_cast<double>(support.size());
    for (std::size_t k : support) x[k] = w0;

    std::vector<double> xs, g;
    double mu = 0.0;
    std::size_t iters = 0;

    while (iters < budget) {
        ++iters;
        if (!kkt_solve(gram, atom_targets, support, xs, mu)) break;

        bool feasible = true;
        for (double v : xs) {
            if (v < 0.0) {
                feasible = false;
                break;
            }
        }

        if (!feasible) {
            // Step to the first blocking constraint and drop it (ties -> lowest index).
            double alpha = 1.0;
            std::size_t drop_pos = support.size();
            for (std::size_t i = 0; i < support.size(); ++i) {
                if (xs[i] >= 0.0) continue;
                const double cur = std::max(x[support[i]], 0.0);
                const double ratio = cur / (cur - xs[i]);
                if (ratio < alpha) {
                    alpha = ratio;
                    drop_pos = i;
                }
            }
            if (drop_pos == support.size()) break;  // cannot happen with a consistent solve
            for (std::size_t i = 0; i < support.size(); ++i) {
                const std::size_t k = support[i];
                x[k] += alpha * (xs[i] - x[k]);
            }
            x[support[drop_pos]] = 0.0;
            support.erase(support.begin() + static_cast<std::ptrdiff_t>(drop_pos));
            continue;
        }

        for (std::size_t i = 0; i < support.size(); ++i) x[support[i]] = xs[i];

        gradient(gram, atom_targets, support, x, g);
        double gmax = 0.0;
        for (double v : g) gmax = std::max(gmax, std::abs(v));
        const double tol = opts.kkt_tol * (1.0 + gmax);

        bool stationary_on_support = true;
        for (std::size_t k : support) {
            if (std::abs(g[k] - mu) > tol) {
                stationary_on_support = false;
                break;
            }
        }

        // Entering index: most negative reduced gradient off the support.
        std::size_t enter = m;
        double enter_val = -tol;
        std::size_t pos = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (pos < support.size() && support[pos] == i) {
                ++pos;
                continue;
            }
            const double red = g[i] - mu;
            if (red < enter_val) {
                enter_val = red;
                enter = i;
            }
        }

        if (enter == m) {
            SimplexSolution sol;
            sol.x = std::move(x);
            sol.support = positive_support(sol.x);
            sol.kkt_multiplier = mu;
            sol.inner_iters = iters;
            sol.certified = stationary_on_support;
            return sol;
        }
        support.insert(std::lower_bound(support.begin(), support.end(), enter), enter);
    }

    SimplexSolution sol;
    sol.x = std::move(x);
    sol.support = positive_support(sol.x);
    sol.kkt_multiplier = mu;
    sol.inner_iters = iters;
    sol.certified = false;
    return sol;
}

SimplexSolution solve_simplex_lsq_column(std::span<const double> y, const Mat& e,
                                         const SimplexLsqOptions& opts) {
    if (y.size() != e.rows()) throw std::invalid_argument("simplex_lsq: target length != rows of e");
    for (double v : y) {
        if (!std::isfinite(v)) throw std::invalid_argument("simplex_lsq: non-finite target");
    }
    require_finite(e, "simplex_lsq dictionary");
    const Mat g = gram(e);
    const std::vector<double> c = matT_vec(e, y);
    return solve_simplex_lsq_gram(g, c, opts, std::max<std::size_t>(e.rows() + 1, 16));
}

Mat solve_simplex_lsq_batch(const Mat& targets, const Mat& e, const SimplexLsqOptions& opts,
                            const Mat* warm, unsigned threads, std::size_t* uncertified) {
    if (targets.rows() != e.rows()) {
        throw std::invalid_argument("simplex_lsq batch: row counts of targets and dictionary differ");
    }
    if (warm && (warm->rows() != e.cols() || warm->cols() != targets.cols())) {
        throw std::invalid_argument("simplex_lsq batch: warm matrix shape mismatch");
    }
    require_finite(targets, "simplex_lsq targets");
    require_finite(e, "simplex_lsq dictionary");

    const std::size_t n = targets.cols();
    const std::size_t r = e.cols();
    const Mat g = gram(e);
    const std::size_t warm_cap = std::max<std::size_t>(e.rows() + 1, 16);
    Mat out(r, n);

    const unsigned worker_count = std::max(1u, threads);
    std::vector<std::size_t> uncert_per_worker(worker_count, 0);
    std::vector<std::exception_ptr> errors(worker_count);

    auto run_range = [&](std::size_t lo, std::size_t hi, unsigned slot) {
        try {
            SimplexLsqOptions col_opts = opts;
            for (std::size_t j = lo; j < hi; ++j) {
                if (warm) {
                    std::vector<std::size_t> ws;
                    const double* wj = warm->col(j);
                    for (std::size_t i = 0; i < r; ++i) {
                        if (wj[i] > 0.0) ws.push_back(i);
                    }
                    col_opts.warm_start = std::move(ws);
                } else {
                    col_opts.warm_start.reset();
                }
                std::vector<double> c = matT_vec(e, targets.col_span(j));
                SimplexSolution sol;
                try {
                    sol = solve_simplex_lsq_gram(g, c, col_opts, warm_cap);
                } catch (const std::exception& ex) {
                    throw std::runtime_error("column " + std::to_string(j) + ": " + ex.what());
                }
                if (!sol.certified) ++uncert_per_worker[slot];
                double* oj = out.col(j);
                for (std::size_t i = 0; i < r; ++i) oj[i] = sol.x[i];
            }
        } catch (...) {
            errors[slot] = std::current_exception();
        }
    };

    if (worker_count == 1) {
        run_range(0, n, 0);
    } else {
        const std::size_t chunk = (n + worker_count - 1) / worker_count;
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < worker_count; ++t) {
            const std::size_t lo = std::min(n, static_cast<std::size_t>(t) * chunk);
            const std::size_t hi = std::min(n, lo + chunk);
            pool.emplace_back(run_range, lo, hi, t);
        }
        for (auto& th : pool) th.join();
    }

    for (auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    if (uncertified) {
        for (std::size_t c : uncert_per_worker) *uncertified += c;
    }
    return out;
}

}  // namespace sunaa
