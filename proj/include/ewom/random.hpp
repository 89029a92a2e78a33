#pragma once

// Seeded draws with fixed transforms so generated data is identical across
// standard libraries (std::*_distribution algorithms are unspecified).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ewom::rnd {

using Engine = std::mt19937_64;

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

/// Uniform on (0, 1).
inline double open01(Engine& g) {
    double u;
    do u = uniform01(g);
    while (u == 0.0);
    return u;
}

inline double standard_normal(Engine& g) {
    const double u1 = open01(g);
    const double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Zero-mean uniform with standard deviation `sd`.
inline double uniform_sd(Engine& g, double sd) { return (2.0 * uniform01(g) - 1.0) * std::sqrt(3.0) * sd; }

/// Zero-mean Laplace with standard deviation `sd`.
inline double laplace_sd(Engine& g, double sd) {
    const double b = sd / std::numbers::sqrt2;
    const double u = open01(g) - 0.5;
    return u < 0 ? b * std::log(1.0 + 2.0 * u) : -b * std::log(1.0 - 2.0 * u);
}

/// Uniform integer in [0, n).
inline std::size_t index(Engine& g, std::size_t n) {
    return static_cast<std::size_t>(uniform01(g) * static_cast<double>(n));
}

}  // namespace ewom::rnd
