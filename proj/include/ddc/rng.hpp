#pragma once

// SplitMix64 generator with explicit bit-level conversions so that seeded
// experiments reproduce exactly across compilers and standard libraries.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ddc {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Independent stream for sub-task `index` derived from a master seed.
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) {
        SplitMix64 mixer(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
        return SplitMix64(mixer.next());
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (one value per call).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform sample from the closed Euclidean ball of the given radius.
    Eigen::VectorXd uniform_ball(int dim, double radius) {
        Eigen::VectorXd d(dim);
        double norm = 0.0;
        while (norm == 0.0) {
            for (int i = 0; i < dim; ++i) d(i) = normal();
            norm = d.norm();
        }
        const double r = radius * std::pow(uniform(), 1.0 / dim);
        return d * (r / norm);
    }

private:
    std::uint64_t state_;
};

}  // namespace ddc
