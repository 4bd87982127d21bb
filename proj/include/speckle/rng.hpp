#pragma once

#include <array>
#include <cstdint>

namespace speckle {

/// SplitMix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Bijective 64-bit finalizer used by SplitMix64.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// xoshiro256** 1.0 seeded through SplitMix64.
///
/// The algorithm is fixed: identical seeds give bitwise-identical streams on
/// every platform. `split()` hands out a generator positioned 2^128 draws
/// ahead (the xoshiro jump polynomial) so the two streams never overlap.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept;

    std::uint64_t next() noexcept;
    std::uint64_t operator()() noexcept { return next(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform on (0, 1).
    double uniform_open() noexcept;
    /// Standard normal (Marsaglia polar method).
    double normal() noexcept;

    /// Returns a copy of the current stream and jumps this one 2^128 ahead.
    Rng split() noexcept;

    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

    friend bool operator==(const Rng&, const Rng&) = default;

private:
    void jump() noexcept;

    std::array<std::uint64_t, 4> s_{};
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace speckle
