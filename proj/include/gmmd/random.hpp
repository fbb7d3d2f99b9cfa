#pragma once

// Counter-based random streams. Draw k of stream (key, id) is a pure function of
// (key, id, k): the 128-bit counter {k_lo, k_hi, id_lo, id_hi} is encrypted with
// Philox4x32-10 under the 64-bit key, and the four output words form two 64-bit
// values; draw k takes value (k mod 2) of block k / 2. Uniforms keep the top 53 bits
// and are shifted to the open interval (0, 1). Normals use the inverse CDF of one uniform.

#include <array>
#include <cstdint>

namespace gmmd::random {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

Counter philox4x32_10(Counter counter, Key key) noexcept;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Standard normal quantile: Acklam's rational approximation (relative error < 1.2e-9),
// no refinement step so that ports reproduce it exactly.
double inverse_normal_cdf(double p) noexcept;

class CounterStream {
public:
    CounterStream(std::uint64_t key, std::uint64_t id) noexcept : key_(key), id_(id) {}

    std::uint64_t bits(std::uint64_t index) const noexcept;
    double uniform(std::uint64_t index) const noexcept;  // in (0, 1)
    double normal(std::uint64_t index) const noexcept { return inverse_normal_cdf(uniform(index)); }

private:
    std::uint64_t key_;
    std::uint64_t id_;
};

}  // namespace gmmd::random
