#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sunaa/types.hpp"

namespace sunaa {

enum class SceneLayout { SquareGrid, Dirichlet };

struct SceneSpec {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::size_t> endmember_indices;  // distinct library columns
    SceneLayout layout = SceneLayout::SquareGrid;
    std::uint64_t seed = 0;  // used by the Dirichlet layout only
};

struct GroundTruth {
    AbundanceMatrix x_true;
    DataCube cube;  // noiseless: selected library columns times x_true
};

/// Builds a ground-truth scene. SquareGrid tiles the image with an r x r grid
/// of square patches (side = min(height,width)/r, rows of squares top to
/// bottom); patch k takes entry k of a fixed schedule -- one pure patch per
/// endmember, then uniform 2-way, 3-way, ..., r-way mixtures of the leading
/// endmembers -- and patches past the schedule, like all background pixels,
/// get the uniform mixture. Dirichlet draws every pixel i.i.d. uniform on the
/// simplex from the seeded generator.
GroundTruth generate_scene(const SpectralLibrary& d, const SceneSpec& spec);

/// Adds seeded i.i.d. Gaussian noise rescaled so the realized SNR in dB is
/// exactly snr_db. Throws on a zero-signal cube.
DataCube add_noise(const DataCube& cube, double snr_db, std::uint64_t seed);

/// Seeded synthetic reflectance library: smooth positive spectra built from a
/// few Gaussian absorption/reflection bumps over the band axis, clamped to
/// (0, 1]. Intended for fixtures and simulation runs.
SpectralLibrary random_library(std::size_t bands, std::size_t count, std::uint64_t seed);

/// Returns a library extended with scaled copies of the chosen columns, the
/// classic confuser for sparse-regression pipelines.
SpectralLibrary append_scaled_duplicates(const SpectralLibrary& d,
                                         std::span<const std::size_t> indices,
                                         std::span<const double> scales);

}  // namespace sunaa
