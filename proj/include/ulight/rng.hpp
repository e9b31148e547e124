#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace ulight {

/// Deterministic pseudo-random source. All randomized operations take an
/// explicit Rng so that runs are reproducible given a seed. Draws are
/// generated from the raw engine output (no implementation-defined
/// std::*_distribution), so a given seed yields the same stream on any
/// platform this code compiles on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1), 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller.
    double normal() {
        // u1 in (0, 1] so the log is finite
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Index drawn with probability proportional to the (unnormalized,
    /// nonnegative) weights.
    Eigen::Index categorical(const Eigen::VectorXd& weights) {
        const double total = weights.sum();
        double r = uniform() * total;
        for (Eigen::Index k = 0; k + 1 < weights.size(); ++k) {
            r -= weights[k];
            if (r < 0.0) return k;
        }
        return weights.size() - 1;
    }

    /// Uniform integer in [0, n).
    std::uint64_t integer(std::uint64_t n) {
        // modulo bias is negligible for n << 2^64
        return engine_() % n;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace ulight
