#include "sunaa/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "sunaa/rng.hpp"

namespace sunaa {

namespace {

void validate_spec(const SpectralLibrary& d, const SceneSpec& spec) {
    if (spec.height < 1 || spec.width < 1) {
        throw std::invalid_argument("generate_scene: height and width must be >= 1");
    }
    const std::size_t r = spec.endmember_indices.size();
    if (r < 1) throw std::invalid_argument("generate_scene: need at least one endmember index");
    if (spec.height * spec.width < r) {
        throw std::invalid_argument("generate_scene: scene smaller than the endmember count");
    }
    std::unordered_set<std::size_t> seen;
    for (std::size_t idx : spec.endmember_indices) {
        if (idx >= d.count()) {
            throw std::invalid_argument("generate_scene: endmember index " + std::to_string(idx) +
                                        " outside library of size " + std::to_string(d.count()));
        }
        if (!seen.insert(idx).second) {
            throw std::invalid_argument("generate_scene: duplicate endmember index " +
                                        std::to_string(idx));
        }
    }
}

/// Uniform k-way mixture whose entries sum to 1.0 exactly: the last active
/// entry absorbs the rounding of the 1/k prefix.
std::vector<double> uniform_mixture(std::size_t r, std::size_t k) {
    std::vector<double> col(r, 0.0);
    const double u = 1.0 / static_cast<double>(k);
    double prefix = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
        col[i] = u;
        prefix += u;
    }
    col[k - 1] = 1.0 - prefix;
    return col;
}

/// Patch schedule: r pure columns, then uniform mixtures of the first
/// 2, 3, ..., r endmembers. Everything else is the uniform r-way mixture.
std::vector<std::vector<double>> patch_schedule(std::size_t r) {
    std::vector<std::vector<double>> schedule;
    for (std::size_t k = 0; k < r; ++k) {
        std::vector<double> col(r, 0.0);
        col[k] = 1.0;
        schedule.push_back(std::move(col));
    }
    for (std::size_t k = 2; k <= r; ++k) schedule.push_back(uniform_mixture(r, k));
    return schedule;
}

Mat grid_abundances(const SceneSpec& spec) {
    const std::size_t r = spec.endmember_indices.size();
    const std::size_t h = spec.height, w = spec.width;
    const std::size_t side = std::min(h, w) / r;
    if (side < 1) {
        throw std::invalid_argument("generate_scene: image too small for an " + std::to_string(r) +
                                    "x" + std::to_string(r) + " patch grid");
    }
    const auto schedule = patch_schedule(r);
    const auto background = uniform_mixture(r, r);

    Mat a(r, h * w);
    for (std::size_t j = 0; j < h * w; ++j) {
        double* aj = a.col(j);
        for (std::size_t i = 0; i < r; ++i) aj[i] = background[i];
    }
    for (std::size_t pi = 0; pi < r; ++pi) {
        for (std::size_t pj = 0; pj < r; ++pj) {
            const std::size_t patch = pi * r + pj;
            const std::vector<double>* mix =
                patch < schedule.size() ? &schedule[patch] : nullptr;
            if (!mix) continue;  // past the schedule: keep the uniform background
            for (std::size_t dy = 0; dy < side; ++dy) {
                for (std::size_t dx = 0; dx < side; ++dx) {
                    const std::size_t row = pi * side + dy;
                    const std::size_t col = pj * side + dx;
                    double* ac = a.col(row * w + col);
                    for (std::size_t i = 0; i < r; ++i) ac[i] = (*mix)[i];
                }
            }
        }
    }
    return a;
}

Mat dirichlet_abundances(const SceneSpec& spec) {
    const std::size_t r = spec.endmember_indices.size();
    const std::size_t n = spec.height * spec.width;
    Rng rng(spec.seed);
    Mat a(r, n);
    std::vector<double> draw(r);
    for (std::size_t j = 0; j < n; ++j) {
        // Symmetric Dirichlet(1) == normalized unit exponentials; the last
        // coordinate absorbs the normalization rounding so columns sum to 1.0.
        double sum = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
            draw[i] = -std::log(1.0 - rng.next_uniform());
            sum += draw[i];
        }
        double* aj = a.col(j);
        double prefix = 0.0;
        for (std::size_t i = 0; i + 1 < r; ++i) {
            aj[i] = draw[i] / sum;
            prefix += aj[i];
        }
        aj[r - 1] = 1.0 - prefix;
    }
    return a;
}

}  // namespace

GroundTruth generate_scene(const SpectralLibrary& d, const SceneSpec& spec) {
    validate_spec(d, spec);
    const std::size_t r = spec.endmember_indices.size();
    Mat x = spec.layout == SceneLayout::SquareGrid ? grid_abundances(spec)
                                                   : dirichlet_abundances(spec);
    Mat selected(d.bands(), r);
    for (std::size_t k = 0; k < r; ++k) {
        const double* src = d.mat().col(spec.endmember_indices[k]);
        double* dst = selected.col(k);
        for (std::size_t i = 0; i < d.bands(); ++i) dst[i] = src[i];
    }
    Mat cube = multiply(selected, x);
    return GroundTruth{AbundanceMatrix(std::move(x)),
                       DataCube(std::move(cube), spec.height, spec.width)};
}

DataCube add_noise(const DataCube& cube, double snr_db, std::uint64_t seed) {
    if (!std::isfinite(snr_db)) throw std::invalid_argument("add_noise: snr_db must be finite");
    const double signal = frobenius_norm(cube.mat());
    if (signal == 0.0) throw std::invalid_argument("add_noise: zero-signal cube, SNR undefined");

    const Mat& y = cube.mat();
    Mat noise(y.rows(), y.cols());
    Rng rng(seed);
    for (std::size_t j = 0; j < y.cols(); ++j) {
        double* nj = noise.col(j);
        for (std::size_t i = 0; i < y.rows(); ++i) nj[i] = rng.next_gaussian();
    }
    const double drawn = frobenius_norm(noise);
    // Rescale the draw so the realized SNR hits the request exactly.
    const double scale = signal / (drawn * std::pow(10.0, snr_db / 20.0));

    Mat out(y.rows(), y.cols());
    for (std::size_t k = 0; k < y.size(); ++k) out.data()[k] = y.data()[k] + scale * noise.data()[k];
    return DataCube(std::move(out), cube.height(), cube.width());
}

SpectralLibrary random_library(std::size_t bands, std::size_t count, std::uint64_t seed) {
    if (bands < 1 || count < 1) throw std::invalid_argument("random_library: sizes must be >= 1");
    Rng rng(seed);
    Mat d(bands, count);
    const std::size_t bumps = 4;
    for (std::size_t j = 0; j < count; ++j) {
        double* col = d.col(j);
        const double base = 0.02 + 0.13 * rng.next_uniform();
        for (std::size_t i = 0; i < bands; ++i) col[i] = base;
        for (std::size_t k = 0; k < bumps; ++k) {
            const double amp = 0.1 + 0.8 * rng.next_uniform();
            const double center = rng.next_uniform() * static_cast<double>(bands - 1);
            const double width = (0.03 + 0.12 * rng.next_uniform()) * static_cast<double>(bands);
            for (std::size_t i = 0; i < bands; ++i) {
                const double t = (static_cast<double>(i) - center) / width;
                col[i] += amp * std::exp(-0.5 * t * t);
            }
        }
        for (std::size_t i = 0; i < bands; ++i) col[i] = std::clamp(col[i], 0.001, 1.0);
    }
    return SpectralLibrary(std::move(d));
}

SpectralLibrary append_scaled_duplicates(const SpectralLibrary& d,
                                         std::span<const std::size_t> indices,
                                         std::span<const double> scales) {
    if (indices.size() != scales.size()) {
        throw std::invalid_argument("append_scaled_duplicates: index/scale count mismatch");
    }
    const std::size_t p = d.bands(), m = d.count();
    Mat out(p, m + indices.size());
    for (std::size_t j = 0; j < m; ++j) {
        const double* src = d.mat().col(j);
        double* dst = out.col(j);
        for (std::size_t i = 0; i < p; ++i) dst[i] = src[i];
    }
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] >= m) {
            throw std::invalid_argument("append_scaled_duplicates: index out of range");
        }
        if (!(scales[k] > 0.0) || !std::isfinite(scales[k])) {
            throw std::invalid_argument("append_scaled_duplicates: scale must be positive finite");
        }
        const double* src = d.mat().col(indices[k]);
        double* dst = out.col(m + k);
        for (std::size_t i = 0; i < p; ++i) dst[i] = scales[k] * src[i];
    }
    return SpectralLibrary(std::move(out));
}

}  // namespace sunaa
