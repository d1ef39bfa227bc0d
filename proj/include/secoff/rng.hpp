#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace secoff {

/// Deterministic RNG wrapper. Draws go through explicit inverse-CDF maps so
/// that streams are reproducible bit-for-bit for a given seed, independent of
/// standard-library distribution internals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Unit-mean exponential via inversion; strictly positive.
    double exponential() {
        double u = uniform01();
        return -std::log1p(-u);
    }

    /// Log-uniform on [lo, hi], lo > 0.
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    std::uint64_t next_u64() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

}  // namespace secoff
