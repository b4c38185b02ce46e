#pragma once

#include <cstdint>

namespace repvar {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/**
 * @brief Counter-based SplitMix64 stream keyed by (seed, rep, stream).
 *
 * Output n of a stream is mix64(key + n * golden), with
 * key = mix64(mix64(mix64(seed) ^ rep) ^ stream). Normals use Box-Muller on
 * two 53-bit uniforms, both halves consumed in order. Every stream is a pure
 * function of its key, so per-rep streams can be evaluated in any order.
 */
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t rep, std::uint64_t stream) noexcept
        : key_(mix64(mix64(mix64(seed) ^ rep) ^ stream)) {}

    std::uint64_t next_u64() noexcept { return mix64(key_ + (counter_++) * 0x9E3779B97F4A7C15ULL); }

    /// Uniform on (0, 1).
    double uniform() noexcept { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() noexcept;
    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace repvar
