#pragma once

#include <array>
#include <cstdint>

namespace sunaa {

/// Seedable 64-bit generator with a fixed algorithm (xoshiro256++ seeded via
/// splitmix64), so streams are reproducible independently of the standard
/// library. Gaussian draws use the Box-Muller transform on 53-bit uniforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 random mantissa bits.
    double next_uniform();

    /// Standard normal deviate; pairs are drawn together and cached.
    double next_gaussian();

private:
    std::array<std::uint64_t, 4> state_;
    double cached_gaussian_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace sunaa
