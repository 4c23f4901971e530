#include "sunaa/sunaa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sunaa {

namespace {

constexpr double kDeadRowTol = 1e-14;

unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

double objective_raw(const Mat& y, const Mat& d, const Mat& b, const Mat& a) {
    // Model evaluated with the same product kernel callers use to build exact
    // fixtures, so a perfectly factorable Y scores a literal zero.
    const Mat model = multiply(multiply(d, b), a);
    double acc = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double diff = y.data()[k] - model.data()[k];
        acc += diff * diff;
    }
    return acc;
}

Mat a_step_raw(const Mat& y, const Mat& d, const Mat& b, const Mat* warm,
               const SimplexLsqOptions& opts, unsigned threads, std::size_t* uncertified) {
    const Mat e = multiply(d, b);
    return solve_simplex_lsq_batch(y, e, opts, warm, threads, uncertified);
}

Mat b_step_raw(const Mat& y, const Mat& d, const Mat& b_old, const Mat& a,
               const SimplexLsqOptions& opts, const Mat* gram_d, const BStepObserver& observer,
               std::size_t* uncertified) {
    const std::size_t p = y.rows(), n = y.cols(), m = d.cols(), r = b_old.cols();
    if (d.rows() != p || b_old.rows() != m || a.rows() != r || a.cols() != n) {
        throw std::invalid_argument("b_step: shapes do not conform");
    }
    Mat local_gram;
    if (!gram_d) local_gram = gram(d);
    const Mat& g = gram_d ? *gram_d : local_gram;
    const std::size_t warm_cap = std::max<std::size_t>(p + 1, 16);

    Mat b = b_old;
    Mat res;
    std::vector<double> ytilde(p);
    for (std::size_t j = 0; j < r; ++j) {
        double row_sq = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double v = a(j, k);
            row_sq += v * v;
        }
        // A dead endmember has no well-defined refit target; leave it as is.
        if (row_sq < kDeadRowTol) {
            if (observer) observer(j, objective_raw(y, d, b, a));
            continue;
        }

        const Mat e = multiply(d, b);
        residual_into(res, y, e, a);
        const double inv = 1.0 / row_sq;
        for (std::size_t i = 0; i < p; ++i) ytilde[i] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double w = a(j, k);
            if (w == 0.0) continue;
            const double* rk = res.col(k);
            for (std::size_t i = 0; i < p; ++i) ytilde[i] += w * rk[i];
        }
        const double* ej = e.col(j);
        for (std::size_t i = 0; i < p; ++i) ytilde[i] = ytilde[i] * inv + ej[i];

        SimplexLsqOptions col_opts = opts;
        std::vector<std::size_t> ws;
        const double* bj = b.col(j);
        for (std::size_t i = 0; i < m; ++i) {
            if (bj[i] > 0.0) ws.push_back(i);
        }
        col_opts.warm_start = std::move(ws);

        std::vector<double> c = matT_vec(d, ytilde);
        SimplexSolution sol;
        try {
            sol = solve_simplex_lsq_gram(g, c, col_opts, warm_cap);
        } catch (const std::exception& ex) {
            throw std::runtime_error("b_step column " + std::to_string(j) + ": " + ex.what());
        }
        if (!sol.certified && uncertified) ++*uncertified;
        double* out = b.col(j);
        for (std::size_t i = 0; i < m; ++i) out[i] = sol.x[i];

        if (observer) observer(j, objective_raw(y, d, b, a));
    }
    return b;
}

}  // namespace

std::pair<ContributionMatrix, AbundanceMatrix> init_uniform(std::size_t m, std::size_t r,
                                                            std::size_t n) {
    if (m < 1 || r < 1 || n < 1) throw std::invalid_argument("init_uniform: sizes must be >= 1");
    Mat b(m, r, 1.0 / static_cast<double>(m));
    Mat a(r, n, 1.0 / static_cast<double>(r));
    return {ContributionMatrix(std::move(b)), AbundanceMatrix(std::move(a))};
}

double objective(const Mat& y, const Mat& d, const Mat& b, const Mat& a) {
    if (d.rows() != y.rows() || d.cols() != b.rows() || b.cols() != a.rows() ||
        a.cols() != y.cols()) {
        throw std::invalid_argument("objective: shapes do not conform");
    }
    return objective_raw(y, d, b, a);
}

AbundanceMatrix a_step(const Mat& y, const Mat& d, const ContributionMatrix& b,
                       const AbundanceMatrix* warm, const SimplexLsqOptions& opts,
                       unsigned threads, std::size_t* uncertified) {
    const Mat* warm_mat = warm ? &warm->mat() : nullptr;
    return AbundanceMatrix(
        a_step_raw(y, d, b.mat(), warm_mat, opts, resolve_threads(threads), uncertified));
}

ContributionMatrix b_step(const Mat& y, const Mat& d, const ContributionMatrix& b_old,
                          const AbundanceMatrix& a, const SimplexLsqOptions& opts,
                          const Mat* gram_d, const BStepObserver& observer,
                          std::size_t* uncertified) {
    return ContributionMatrix(
        b_step_raw(y, d, b_old.mat(), a.mat(), opts, gram_d, observer, uncertified));
}

FitResult fit(const DataCube& y, const SpectralLibrary& d, const SunaaConfig& cfg) {
    const std::size_t p = y.bands(), n = y.pixels(), m = d.count(), r = cfg.rank;
    if (d.bands() != p) {
        throw std::invalid_argument("fit: cube has " + std::to_string(p) + " bands but library has " +
                                    std::to_string(d.bands()));
    }
    if (r < 1 || r > m) throw std::invalid_argument("fit: rank must satisfy 1 <= r <= library size");
    if (cfg.outer_iters < 1) throw std::invalid_argument("fit: outer_iters must be >= 1");
    if (!(cfg.rel_obj_tol >= 0.0)) throw std::invalid_argument("fit: rel_obj_tol must be >= 0");

    const unsigned threads = resolve_threads(cfg.threads);
    const Mat& ym = y.mat();
    const Mat& dm = d.mat();
    Mat b(m, r, 1.0 / static_cast<double>(m));
    Mat a(r, n, 1.0 / static_cast<double>(r));
    const Mat gram_d = gram(dm);

    std::vector<double> trace;
    trace.reserve(std::min<std::size_t>(cfg.outer_iters, 1024));
    std::size_t uncertified = 0;
    bool early = false;
    double prev = 0.0;

    std::size_t t = 0;
    while (t < cfg.outer_iters) {
        ++t;
        a = a_step_raw(ym, dm, b, &a, cfg.solver_opts, threads, &uncertified);
        b = b_step_raw(ym, dm, b, a, cfg.solver_opts, &gram_d, {}, &uncertified);
        const double obj = objective_raw(ym, dm, b, a);
        trace.push_back(obj);
        if (t >= 2) {
            if ((prev - obj) < cfg.rel_obj_tol * prev || (obj == 0.0 && cfg.rel_obj_tol > 0.0)) {
                early = true;
                break;
            }
        }
        prev = obj;
    }

    FitResult result{ContributionMatrix(b), AbundanceMatrix(a), multiply(dm, b),
                     std::move(trace), t, early, uncertified};
    return result;
}

FitResult fit_blind_aa(const DataCube& y, const SunaaConfig& cfg) {
    if (y.pixels() < cfg.rank) {
        throw std::invalid_argument("fit_blind_aa: need at least rank pixels");
    }
    return fit(y, SpectralLibrary(y.mat()), cfg);
}

AbundanceMatrix drop_and_renormalize(const AbundanceMatrix& a, std::size_t index) {
    const std::size_t r = a.rank(), n = a.pixels();
    if (r < 2) throw std::invalid_argument("drop_and_renormalize: need at least two rows");
    if (index >= r) throw std::invalid_argument("drop_and_renormalize: row index out of range");
    const Mat& src = a.mat();
    Mat out(r - 1, n);
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
            if (i != index) sum += src(i, j);
        }
        double* oj = out.col(j);
        if (sum <= kNegativityTol) {
            const double u = 1.0 / static_cast<double>(r - 1);
            for (std::size_t i = 0; i + 1 < r; ++i) oj[i] = u;
            continue;
        }
        std::size_t dst = 0;
        for (std::size_t i = 0; i < r; ++i) {
            if (i == index) continue;
            oj[dst++] = src(i, j) / sum;
        }
    }
    return AbundanceMatrix(std::move(out));
}

}  // namespace sunaa
