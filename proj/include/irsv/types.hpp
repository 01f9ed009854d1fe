#pragma once

#include <complex>
#include <random>

#include <Eigen/Dense>

namespace irsv {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// Every Monte-Carlo trial owns one of these; see trial_rng() in harness.hpp.
using Rng = std::mt19937_64;

inline constexpr Complex kJ{0.0, 1.0};

/// Circularly-symmetric complex Gaussian with E|x|^2 = variance.
inline Complex complex_normal(Rng& rng, double variance) {
    std::normal_distribution<double> n(0.0, 1.0);
    const double s = std::sqrt(0.5 * variance);
    const double re = n(rng);
    const double im = n(rng);
    return {s * re, s * im};
}

}  // namespace irsv
