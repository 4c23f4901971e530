#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oracle.hpp"
#include "sunaa/mat.hpp"
#include "sunaa/metrics.hpp"
#include "sunaa/rng.hpp"
#include "sunaa/sunaa.hpp"
#include "sunaa/synth.hpp"
#include "sunaa/types.hpp"

using namespace sunaa;

namespace {

Mat random_simplex_cols(std::size_t rows, std::size_t cols, Rng& rng) {
    Mat m(rows, cols);
    for (std::size_t j = 0; j < cols; ++j) {
        double sum = 0.0;
        std::vector<double> draw(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            draw[i] = -std::log(1.0 - rng.next_uniform());
            sum += draw[i];
        }
        double prefix = 0.0;
        for (std::size_t i = 0; i + 1 < rows; ++i) {
            m(i, j) = draw[i] / sum;
            prefix += m(i, j);
        }
        m(rows - 1, j) = 1.0 - prefix;
    }
    return m;
}

Mat one_hot_contributions(std::size_t m, const std::vector<std::size_t>& picks) {
    Mat b(m, picks.size());
    for (std::size_t j = 0; j < picks.size(); ++j) b(picks[j], j) = 1.0;
    return b;
}

}  // namespace

TEST_CASE("init_uniform fills both factors uniformly") {
    const auto [b, a] = init_uniform(4, 2, 3);
    CHECK(b.mat().rows() == 4);
    CHECK(b.mat().cols() == 2);
    CHECK(a.mat().rows() == 2);
    CHECK(a.mat().cols() == 3);
    for (std::size_t k = 0; k < b.mat().size(); ++k) CHECK(b.mat().data()[k] == 0.25);
    for (std::size_t k = 0; k < a.mat().size(); ++k) CHECK(a.mat().data()[k] == 0.5);
    // Power-of-two sizes sum exactly.
    for (std::size_t j = 0; j < 2; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < 4; ++i) sum += b.mat()(i, j);
        CHECK(sum == 1.0);
    }
}

TEST_CASE("init_uniform trivial case") {
    const auto [b, a] = init_uniform(1, 1, 1);
    CHECK(b.mat()(0, 0) == 1.0);
    CHECK(a.mat()(0, 0) == 1.0);
}

TEST_CASE("objective is the squared residual norm") {
    Rng rng(52);
    Mat d(10, 5);
    for (std::size_t k = 0; k < d.size(); ++k) d.data()[k] = rng.next_gaussian();
    const Mat b = random_simplex_cols(5, 2, rng);
    const Mat a = random_simplex_cols(2, 6, rng);
    const Mat y = multiply(multiply(d, b), a);
    CHECK(objective(y, d, b, a) == 0.0);

    // Perturb by a matrix of known norm: objective equals its square.
    Mat g(10, 6);
    for (std::size_t k = 0; k < g.size(); ++k) g.data()[k] = rng.next_gaussian();
    const double gn = frobenius_norm(g);
    Mat y2 = y;
    for (std::size_t k = 0; k < y2.size(); ++k) y2.data()[k] += 2.0 * g.data()[k] / gn;
    CHECK(objective(y2, d, b, a) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("objective matches a direct evaluation oracle on the uniform init") {
    Rng rng(53);
    Mat d(10, 5);
    for (std::size_t k = 0; k < d.size(); ++k) d.data()[k] = rng.next_gaussian();
    Mat y(10, 6);
    for (std::size_t k = 0; k < y.size(); ++k) y.data()[k] = rng.next_gaussian();
    const auto [b, a] = init_uniform(5, 2, 6);

    double expected = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            double model = 0.0;
            for (std::size_t k = 0; k < 5; ++k) {
                for (std::size_t l = 0; l < 2; ++l) model += d(i, k) * 0.2 * 0.5;
            }
            const double diff = y(i, j) - model;
            expected += diff * diff;
        }
    }
    CHECK(objective(y, d, b.mat(), a.mat()) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("objective rejects mismatched shapes") {
    Mat y(3, 2), d(3, 4), b(4, 2), a(3, 2);  // a has wrong row count
    CHECK_THROWS_AS(objective(y, d, b, a), std::invalid_argument);
}

TEST_CASE("a_step recovers abundances exactly on noiseless one-hot data") {
    Rng rng(7001);
    const SpectralLibrary lib = random_library(24, 12, 7001);
    const std::vector<std::size_t> picks{1, 4, 9};
    const Mat b = one_hot_contributions(12, picks);
    const Mat a_true = random_simplex_cols(3, 15, rng);
    const Mat y = multiply(multiply(lib.mat(), b), a_true);

    const AbundanceMatrix a_hat =
        a_step(y, lib.mat(), ContributionMatrix(b), nullptr, SimplexLsqOptions{});
    for (std::size_t k = 0; k < a_true.size(); ++k) {
        CHECK(a_hat.mat().data()[k] == doctest::Approx(a_true.data()[k]).epsilon(1e-8));
    }
}

TEST_CASE("a_step with rank one returns all-ones abundances") {
    Rng rng(7002);
    Mat d(6, 3);
    for (std::size_t k = 0; k < d.size(); ++k) d.data()[k] = rng.next_gaussian();
    Mat b(3, 1, 1.0 / 3.0);
    Mat y(6, 4);
    for (std::size_t k = 0; k < y.size(); ++k) y.data()[k] = rng.next_gaussian();
    const AbundanceMatrix a =
        a_step(y, d, ContributionMatrix(b), nullptr, SimplexLsqOptions{});
    for (std::size_t j = 0; j < 4; ++j) CHECK(a.mat()(0, j) == 1.0);
}

TEST_CASE("a_step never increases the objective relative to the warm point") {
    Rng rng(7003);
    const SpectralLibrary lib = random_library(15, 8, 7003);
    const Mat b = random_simplex_cols(8, 3, rng);
    const Mat warm = random_simplex_cols(3, 10, rng);
    Mat y(15, 10);
    for (std::size_t k = 0; k < y.size(); ++k) y.data()[k] = rng.next_gaussian();

    const ContributionMatrix bm(b);
    const AbundanceMatrix warm_a(warm);
    const AbundanceMatrix next = a_step(y, lib.mat(), bm, &warm_a, SimplexLsqOptions{});
    CHECK(objective(y, lib.mat(), b, next.mat()) <=
          objective(y, lib.mat(), b, warm) * (1.0 + 1e-12) + 1e-12);
}

TEST_CASE("b_step leaves columns with dead abundance rows unchanged") {
    Rng rng(7004);
    const SpectralLibrary lib = random_library(12, 7, 7004);
    const Mat b = random_simplex_cols(7, 2, rng);
    Mat a(2, 5);
    for (std::size_t j = 0; j < 5; ++j) {
        a(0, j) = 1.0;  // row 1 is dead
        a(1, j) = 0.0;
    }
    const Mat y = multiply(multiply(lib.mat(), b), a);
    const ContributionMatrix updated =
        b_step(y, lib.mat(), ContributionMatrix(b), AbundanceMatrix(a), SimplexLsqOptions{});
    for (std::size_t i = 0; i < 7; ++i) CHECK(updated.mat()(i, 1) == b(i, 1));
}

TEST_CASE("identity contributions are a fixed point on exactly factorable data") {
    Rng rng(7005);
    Mat d(9, 4);
    for (std::size_t k = 0; k < d.size(); ++k) d.data()[k] = 0.5 + rng.next_uniform();
    const Mat a = random_simplex_cols(4, 11, rng);
    const Mat y = multiply(d, a);
    Mat eye(4, 4);
    for (std::size_t i = 0; i < 4; ++i) eye(i, i) = 1.0;

    const ContributionMatrix updated =
        b_step(y, d, ContributionMatrix(eye), AbundanceMatrix(a), SimplexLsqOptions{});
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) CHECK(updated.mat()(i, j) == eye(i, j));
    }
}

TEST_CASE("b_step decreases the objective after every column update") {
    Rng rng(7006);
    const SpectralLibrary lib = random_library(20, 15, 7006);
    const Mat b = random_simplex_cols(15, 4, rng);
    const Mat a = random_simplex_cols(4, 30, rng);
    Mat y(20, 30);
    {
        const Mat model = multiply(multiply(lib.mat(), b), a);
        for (std::size_t k = 0; k < y.size(); ++k) {
            y.data()[k] = model.data()[k] + 0.05 * rng.next_gaussian();
        }
    }
    double last = objective(y, lib.mat(), b, a);
    std::vector<double> per_column;
    b_step(y, lib.mat(), ContributionMatrix(b), AbundanceMatrix(a), SimplexLsqOptions{}, nullptr,
           [&](std::size_t, double obj) { per_column.push_back(obj); });
    CHECK(per_column.size() == 4);
    for (double obj : per_column) {
        CHECK(obj <= last + 1e-12);
        last = obj;
    }
}

TEST_CASE("fit nails a noiseless grid scene") {
    const SpectralLibrary lib = random_library(30, 20, 42);
    SceneSpec spec;
    spec.height = 12;
    spec.width = 12;
    spec.endmember_indices = {2, 7, 13};
    spec.layout = SceneLayout::SquareGrid;
    const GroundTruth truth = generate_scene(lib, spec);

    SunaaConfig cfg;
    cfg.rank = 3;
    cfg.outer_iters = 200;
    const FitResult result = fit(truth.cube, lib, cfg);

    CHECK(result.objective_trace.back() <=
          1e-10 * frobenius_norm_sq(truth.cube.mat()));
    Mat e_true(30, 3);
    for (std::size_t k = 0; k < 3; ++k) {
        for (std::size_t i = 0; i < 30; ++i) {
            e_true(i, k) = lib.mat()(i, spec.endmember_indices[k]);
        }
    }
    const Alignment alignment = align_endmembers(e_true, result.e);
    CHECK(aligned_sre_db(truth.x_true.mat(), result.a.mat(), alignment) >= 25.0);
}

TEST_CASE("fit with one outer iteration equals a_step then b_step") {
    Rng rng(7007);
    const SpectralLibrary lib = random_library(14, 9, 7007);
    Mat y(14, 8);
    for (std::size_t k = 0; k < y.size(); ++k) y.data()[k] = rng.next_uniform();
    const DataCube cube(y, 2, 4);

    SunaaConfig cfg;
    cfg.rank = 3;
    cfg.outer_iters = 1;
    const FitResult result = fit(cube, lib, cfg);

    const auto [b0, a0] = init_uniform(9, 3, 8);
    const AbundanceMatrix a1 = a_step(y, lib.mat(), b0, &a0, cfg.solver_opts);
    const ContributionMatrix b1 = b_step(y, lib.mat(), b0, a1, cfg.solver_opts);
    CHECK(result.a.mat() == a1.mat());
    CHECK(result.b.mat() == b1.mat());
    CHECK(result.iterations_run == 1);
    CHECK_FALSE(result.converged_early);
}

TEST_CASE("fit monotone descent and invariants on a noisy instance") {
    const SpectralLibrary lib = random_library(18, 14, 99);
    SceneSpec spec;
    spec.height = 6;
    spec.width = 8;
    spec.endmember_indices = {0, 5, 11};
    spec.layout = SceneLayout::Dirichlet;
    spec.seed = 3;
    const GroundTruth truth = generate_scene(lib, spec);
    const DataCube noisy = add_noise(truth.cube, 30.0, 17);

    SunaaConfig cfg;
    cfg.rank = 3;
    cfg.outer_iters = 40;
    const FitResult result = fit(noisy, lib, cfg);

    for (std::size_t t = 1; t < result.objective_trace.size(); ++t) {
        CHECK(result.objective_trace[t] <=
              result.objective_trace[t - 1] * (1.0 + 1e-8));
    }
    // Contribution and abundance invariants are enforced by the wrapper types;
    // the endmember recomputation check is explicit.
    const Mat recomputed = multiply(lib.mat(), result.b.mat());
    for (std::size_t k = 0; k < recomputed.size(); ++k) {
        CHECK(std::abs(recomputed.data()[k] - result.e.data()[k]) <= 1e-10);
    }
    if (result.converged_early) {
        const auto& tr = result.objective_trace;
        REQUIRE(tr.size() >= 2);
        const double prev = tr[tr.size() - 2], cur = tr.back();
        CHECK((prev - cur) < cfg.rel_obj_tol * prev + 1e-30);
    }
}

TEST_CASE("objective is invariant under slot permutation") {
    Rng rng(7008);
    const SpectralLibrary lib = random_library(16, 10, 7008);
    const Mat b = random_simplex_cols(10, 4, rng);
    const Mat a = random_simplex_cols(4, 12, rng);
    Mat y(16, 12);
    for (std::size_t k = 0; k < y.size(); ++k) y.data()[k] = rng.next_uniform();

    std::vector<std::size_t> perm{2, 0, 3, 1};
    Mat bp(10, 4), ap(4, 12);
    for (std::size_t j = 0; j < 4; ++j) {
        for (std::size_t i = 0; i < 10; ++i) bp(i, j) = b(i, perm[j]);
        for (std::size_t i = 0; i < 12; ++i) ap(j, i) = a(perm[j], i);
    }
    CHECK(objective(y, lib.mat(), b, a) ==
          doctest::Approx(objective(y, lib.mat(), bp, ap)).epsilon(1e-12));
}

TEST_CASE("blind variant equals fitting against the pixels as a library") {
    Rng rng(7009);
    Mat y(10, 30);
    for (std::size_t k = 0; k < y.size(); ++k) y.data()[k] = rng.next_uniform();
    const DataCube cube(y, 5, 6);

    SunaaConfig cfg;
    cfg.rank = 3;
    cfg.outer_iters = 15;
    const FitResult blind = fit_blind_aa(cube, cfg);
    const FitResult direct = fit(cube, SpectralLibrary(y), cfg);
    CHECK(blind.a.mat() == direct.a.mat());
    CHECK(blind.b.mat() == direct.b.mat());
    CHECK(blind.b.mat().rows() == 30);

    for (std::size_t t = 1; t < blind.objective_trace.size(); ++t) {
        CHECK(blind.objective_trace[t] <= blind.objective_trace[t - 1] * (1.0 + 1e-8));
    }
}

TEST_CASE("repeated archetype data admits an exact factorization") {
    // r distinct pixels, each repeated: picking those pixels as archetypes and
    // indicator abundances reproduces the data exactly.
    Rng rng(7010);
    Mat points(6, 2);
    for (std::size_t k = 0; k < points.size(); ++k) points.data()[k] = rng.next_uniform();
    Mat y(6, 8);
    for (std::size_t j = 0; j < 8; ++j) {
        const std::size_t which = j < 4 ? 0 : 1;
        for (std::size_t i = 0; i < 6; ++i) y(i, j) = points(i, which);
    }
    Mat c(8, 2);
    c(0, 0) = 1.0;  // archetype 1 = pixel 0
    c(4, 1) = 1.0;  // archetype 2 = pixel 4
    Mat a(2, 8);
    for (std::size_t j = 0; j < 8; ++j) a(j < 4 ? 0 : 1, j) = 1.0;
    CHECK(objective(y, y, c, a) == 0.0);
}

TEST_CASE("drop_and_renormalize removes a row and rescales columns") {
    Mat a(3, 3);
    // col 0: generic; col 1: all weight on the dropped row; col 2: none on it.
    a(0, 0) = 0.2; a(1, 0) = 0.5; a(2, 0) = 0.3;
    a(0, 1) = 0.0; a(1, 1) = 1.0; a(2, 1) = 0.0;
    a(0, 2) = 0.75; a(1, 2) = 0.0; a(2, 2) = 0.25;
    const AbundanceMatrix out = drop_and_renormalize(AbundanceMatrix(a), 1);
    CHECK(out.mat().rows() == 2);
    CHECK(out.mat()(0, 0) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(out.mat()(1, 0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(out.mat()(0, 1) == 0.5);  // orphaned column becomes uniform
    CHECK(out.mat()(1, 1) == 0.5);
    CHECK(out.mat()(0, 2) == 0.75);
    CHECK(out.mat()(1, 2) == 0.25);
}

TEST_CASE("fit validates its configuration") {
    const SpectralLibrary lib = random_library(8, 5, 1);
    Mat y(8, 4, 0.5);
    const DataCube cube(y, 2, 2);
    SunaaConfig cfg;
    cfg.rank = 6;  // exceeds library size
    CHECK_THROWS_AS(fit(cube, lib, cfg), std::invalid_argument);
    cfg.rank = 2;
    cfg.outer_iters = 0;
    CHECK_THROWS_AS(fit(cube, lib, cfg), std::invalid_argument);
    cfg.outer_iters = 5;
    const SpectralLibrary wrong_bands = random_library(9, 5, 2);
    CHECK_THROWS_AS(fit(cube, wrong_bands, cfg), std::invalid_argument);
}
