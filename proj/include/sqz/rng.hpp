// rng.hpp - seeded per-trajectory random streams
//
// Trajectory k of a run with seed S draws from a 64-bit Mersenne twister
// initialised through std::seed_seq{S_lo, S_hi, k_lo, k_hi}. Both the engine
// and seed_seq are fully specified by the standard, so a (seed, k) pair gives
// the same stream on every conforming implementation. Normal deviates come
// from the Box-Muller transform on 53-bit uniforms in (0, 1].

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

namespace sqz {

class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t substream)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(substream), static_cast<std::uint32_t>(substream >> 32)};
        engine_.seed(seq);
    }

    // Uniform on (0, 1].
    double uniform() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

    // Two independent standard normal deviates.
    std::pair<double, double> normal_pair()
    {
        const double radius = std::sqrt(-2.0 * std::log(uniform()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

private:
    std::mt19937_64 engine_;
};

} // namespace sqz
