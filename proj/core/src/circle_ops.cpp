#include "torusfill/circle_ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "torusfill/errors.hpp"
#include "torusfill/fft.hpp"

namespace torusfill {

namespace {
// Signed frequency for natural DFT index k (size n): k >= n/2 aliases k - n.
int signed_freq(std::size_t k, std::size_t n) {
  return k < n / 2 ? int(k) : int(k) - int(n);
}
}  // namespace

BoundaryFunction hilbert_transform(const BoundaryFunction& u,
                                   HilbertNormalization normalization) {
  const std::size_t n = u.size();
  auto c = u.coefficients();
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const int s = signed_freq(k, n);
    // Nyquist zeroed: its sign is ambiguous and sin(N theta / 2) samples to 0.
    if (s == 0 || k == n / 2)
      out[k] = 0.0;
    else
      out[k] = Complex(0.0, s > 0 ? -1.0 : 1.0) * c[k];
  }
  auto h = BoundaryFunction::from_coefficients(std::move(out));
  if (normalization == HilbertNormalization::at_one) h = h + (-h.sample(0));
  return h;
}

double holomorphy_residual(const BoundaryFunction& g) {
  const std::size_t n = g.size();
  auto c = g.coefficients();
  double neg = 0.0, all = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = std::norm(c[k]);
    all += e;
    if (signed_freq(k, n) < 0) neg += e;
  }
  if (all == 0.0) return 0.0;
  return std::sqrt(neg / all);
}

Complex holomorphic_extension(const BoundaryFunction& g, Complex z, double tol) {
  const double res = holomorphy_residual(g);
  if (res >= tol)
    fail(ErrorCode::NotHolomorphic,
         "negative-frequency residual " + std::to_string(res) + " exceeds tolerance");
  auto c = g.coefficients();
  Complex acc = 0.0;
  for (std::size_t k = g.size() / 2; k-- > 0;) acc = acc * z + c[k];
  return acc;
}

int winding_number(const BoundaryFunction& curve, double max_phase_step) {
  const std::size_t n = curve.size();
  for (std::size_t j = 0; j < n; ++j)
    if (std::abs(curve.sample(j)) == 0.0)
      fail(ErrorCode::CurveThroughZero, "curve vanishes at sample " + std::to_string(j));
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const Complex a = curve.sample(j);
    const Complex b = curve.sample((j + 1) % n);
    const double step = std::arg(b / a);
    if (std::abs(step) >= max_phase_step)
      fail(ErrorCode::Undersampled,
           "phase step " + std::to_string(step) + " at sample " + std::to_string(j) +
               " reaches the resolution limit");
    total += step;
  }
  return int(std::lround(total / kTwoPi));
}

LogBranch log_branch(const BoundaryFunction& curve) {
  const int w = winding_number(curve);
  if (w != 0)
    fail(ErrorCode::NonzeroWinding,
         "curve winds " + std::to_string(w) + " times about 0; no continuous log");
  const std::size_t n = curve.size();
  std::vector<Complex> a(n), b(n);
  double phase = std::arg(curve.sample(0));  // principal value in (-pi, pi]
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) phase += std::arg(curve.sample(j) / curve.sample(j - 1));
    a[j] = std::log(std::abs(curve.sample(j)));
    b[j] = phase;
  }
  return {BoundaryFunction::from_samples(std::move(a)),
          BoundaryFunction::from_samples(std::move(b))};
}

BoundaryFunction theta_derivative(const BoundaryFunction& u) {
  const std::size_t n = u.size();
  auto c = u.coefficients();
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    // Nyquist dropped so real inputs keep real derivatives.
    if (k == n / 2)
      out[k] = 0.0;
    else
      out[k] = Complex(0.0, signed_freq(k, n)) * c[k];
  }
  return BoundaryFunction::from_coefficients(std::move(out));
}

BoundaryFunction holomorphic_projection(const BoundaryFunction& g) {
  const std::size_t n = g.size();
  auto c = g.coefficients();
  std::vector<Complex> out(n, 0.0);
  for (std::size_t k = 0; k < n / 2; ++k) out[k] = c[k];
  return BoundaryFunction::from_coefficients(std::move(out));
}

BoundaryFunction resample(const BoundaryFunction& g, std::size_t m) {
  if (m < BoundaryFunction::kMinGrid || !fft::is_power_of_two(m))
    fail(ErrorCode::InvalidGrid,
         "target grid must be a power of two >= 16, got " + std::to_string(m));
  const std::size_t n = g.size();
  if (m == n) return g;
  auto c = g.coefficients();
  std::vector<Complex> out(m, 0.0);
  if (m > n) {
    // Zero-pad; split the old Nyquist bin into +-n/2 so real stays real.
    for (std::size_t k = 0; k < n / 2; ++k) out[k] = c[k];
    for (std::size_t k = n / 2 + 1; k < n; ++k) out[m - (n - k)] = c[k];
    out[n / 2] = 0.5 * c[n / 2];
    out[m - n / 2] = 0.5 * c[n / 2];
  } else {
    // Truncate; bins +-m/2 land on the same coarse-grid function, so they sum.
    for (std::size_t k = 0; k < m / 2; ++k) out[k] = c[k];
    for (std::size_t k = 1; k < m / 2; ++k) out[m - k] = c[n - k];
    out[m / 2] = c[m / 2] + c[n - m / 2];
  }
  return BoundaryFunction::from_coefficients(std::move(out));
}

HolderEstimate holder_norm(const BoundaryFunction& u, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    fail(ErrorCode::OutOfRange, "Holder exponent must lie in (0, 1]");
  const std::size_t n = u.size();
  const BoundaryFunction du = theta_derivative(u);
  double c0 = 0.0, c1 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    c0 = std::max(c0, std::abs(u.sample(j)));
    c1 = std::max(c1, std::abs(du.sample(j)));
  }
  // Chordal distance between sample points j and k.
  auto chord = [&](std::size_t j, std::size_t k) {
    return 2.0 * std::abs(std::sin(kPi * double(k > j ? k - j : j - k) / double(n)));
  };
  double semi = 0.0;
  auto consider = [&](std::size_t j, std::size_t k) {
    const double d = chord(j, k);
    if (d > 0.0)
      semi = std::max(semi, std::abs(du.sample(j) - du.sample(k)) / std::pow(d, alpha));
  };
  const std::size_t stride = n <= 512 ? 1 : n / 512;
  for (std::size_t j = 0; j < n; j += stride)
    for (std::size_t k = j + 1; k < n; k += stride) consider(j, k);
  // Adjacent pairs always enter: they dominate the local difference quotient.
  if (stride > 1)
    for (std::size_t j = 0; j < n; ++j) consider(j, (j + 1) % n);
  return {alpha, c0, c1, semi};
}

}  // namespace torusfill
