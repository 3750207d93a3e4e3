#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace modoma {

/// Seeded generator with platform-independent derived distributions.
///
/// The standard distributions are implementation-defined, so everything that
/// must replay bit-identically goes through the helpers here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound); bound must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// Index drawn proportionally to nonnegative weights with positive sum.
    std::size_t weighted(std::span<const double> weights);

private:
    std::mt19937_64 engine_;
};

/// Deterministic sub-stream seed; used to give workers independent streams.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace modoma
