#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace concept_dist::rng {

/// splitmix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Stateless draw: the same (seed, key, counter) always yields the same bits.
constexpr std::uint64_t bits(std::uint64_t seed, std::uint64_t key, std::uint64_t counter) noexcept {
    return mix(mix(mix(seed) ^ key) ^ counter);
}

/// Uniform in (0, 1].
inline double uniform(std::uint64_t seed, std::uint64_t key, std::uint64_t counter) noexcept {
    return static_cast<double>((bits(seed, key, counter) >> 11) + 1) * 0x1.0p-53;
}

/// Standard normal pair via Box-Muller from two keyed uniforms.
inline void normal_pair(std::uint64_t seed, std::uint64_t key, double& a, double& b) noexcept {
    const double r = std::sqrt(-2.0 * std::log(uniform(seed, key, 0)));
    const double theta = 2.0 * std::numbers::pi * uniform(seed, key, 1);
    a = r * std::cos(theta);
    b = r * std::sin(theta);
}

} // namespace concept_dist::rng
