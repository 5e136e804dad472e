#pragma once

#include <cstdint>
#include <random>

namespace adagrid {

/// Seeded generator with platform-independent conversions.
///
/// std::uniform_*_distribution is implementation-defined, so the conversions
/// from raw 64-bit output are done here to keep traces identical across
/// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

/// Deterministic child seed (splitmix64 mixing of the inputs).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

}  // namespace adagrid
