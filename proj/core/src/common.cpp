#include "torusfill/common.hpp"

#include <cmath>

namespace torusfill {

namespace {
// f(x) = exp(-1/x) for x > 0, flat zero otherwise.
double bump_half(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
double bump_half_derivative(double x) {
  return x > 0.0 ? std::exp(-1.0 / x) / (x * x) : 0.0;
}
}  // namespace

double smooth_ramp(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double f = bump_half(x);
  const double g = bump_half(1.0 - x);
  return f / (f + g);
}

double smooth_ramp_derivative(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double f = bump_half(x);
  const double g = bump_half(1.0 - x);
  const double fp = bump_half_derivative(x);
  const double gp = bump_half_derivative(1.0 - x);
  // d/dx [f/(f+g)] with g(x) = bump(1-x), so g' = -gp.
  const double denom = (f + g) * (f + g);
  return (fp * g + f * gp) / denom;
}

}  // namespace torusfill
