#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ace {

// Deterministic random stream. All stochastic code in the project draws
// from this wrapper so that a run is fully reproducible from its seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

    void reseed(std::uint64_t seed) { gen_.seed(seed); }

    // Uniform in [lo, hi).
    double uniform(double lo = 0.0, double hi = 1.0) {
        double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    // Standard normal via Box-Muller. No cached spare value, so the
    // draw sequence is a pure function of the call sequence.
    double gaussian() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t nextUint() { return gen_(); }

    // Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform(0.0, static_cast<double>(n)));
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace ace
