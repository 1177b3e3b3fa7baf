#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "schrolab/grid.hpp"

namespace testing {

inline schrolab::Grid default_grid() { return schrolab::Grid(1, 8.0, 513); }

inline schrolab::GridMeasure gaussian(const schrolab::Grid& grid, double mean, double variance) {
    return schrolab::make_grid_measure(schrolab::gaussian_1d(mean, variance), grid);
}

inline double l1(std::span<const double> a, std::span<const double> b) {
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
    return total;
}

// Closed-form entropic cost between N(a, alpha) and N(b, beta) against the
// heat-kernel reference dx p_T(x, y) dy. The optimal coupling is Gaussian
// with cross covariance c = sqrt(T^2 + alpha beta) - T; the entropy against
// the reference is then explicit.
inline double gaussian_bridge_cost(double a, double alpha, double b, double beta, double T) {
    const double c = std::sqrt(T * T + alpha * beta) - T;
    const double pi = std::numbers::pi;
    return -std::log(2.0 * pi * std::exp(1.0)) - 0.5 * std::log(alpha * beta - c * c) + 0.5 * std::log(4.0 * pi * T) +
           ((a - b) * (a - b) + alpha + beta - 2.0 * c) / (4.0 * T);
}

// Lebesgue entropy of N(m, v), written out independently of the library.
inline double gaussian_entropy(double variance) {
    return -0.5 * std::log(2.0 * std::numbers::pi * std::exp(1.0) * variance);
}

}  // namespace testing
