#pragma once

#include <complex>
#include <numbers>

namespace torusfill {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double sqr(double x) { return x * x; }

// C-infinity ramp: 0 for x <= 0, 1 for x >= 1, strictly increasing between.
double smooth_ramp(double x);
double smooth_ramp_derivative(double x);

}  // namespace torusfill
