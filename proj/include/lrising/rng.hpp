#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace lrising {

/// Seeded random source used everywhere in the library.
///
/// Wraps std::mt19937_64 but maps raw engine words to doubles and bounded
/// integers in-house, so that a given seed produces the same stream on any
/// standard library. Distribution objects from <random> are never used.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Multiply-shift mapping; the bias is
    /// below n / 2^64, irrelevant for lattice-sized n.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

    /// Fair coin in {-1, +1}.
    int coin() { return (engine_() >> 63) ? +1 : -1; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller (pair cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace lrising
