#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "torusfill/common.hpp"

namespace torusfill {

// Complex-valued function on the unit circle held as N uniform samples at
// theta_j = 2 pi j / N, N a power of two >= 16.  Immutable: every operation
// returns a new value.  Fourier coefficients are derived lazily and cached;
// copies share the cache.
class BoundaryFunction {
 public:
  static constexpr std::size_t kDefaultGrid = 256;
  static constexpr std::size_t kMinGrid = 16;

  static BoundaryFunction from_samples(std::vector<Complex> samples);
  static BoundaryFunction constant(std::size_t n, Complex value);
  static BoundaryFunction from_function(std::size_t n,
                                        const std::function<Complex(double)>& f);
  // Coefficients in natural DFT order (k = 0..N-1, k >= N/2 aliases k-N).
  static BoundaryFunction from_coefficients(std::vector<Complex> dft_coeffs);

  std::size_t size() const { return data_->samples.size(); }
  double theta(std::size_t j) const { return kTwoPi * double(j) / double(size()); }
  Complex lambda(std::size_t j) const;  // e^{i theta_j}

  Complex sample(std::size_t j) const { return data_->samples[j]; }
  std::span<const Complex> samples() const { return data_->samples; }

  // Cached spectrum, natural DFT order.
  std::span<const Complex> coefficients() const;
  // Signed index k in [-N/2, N/2).
  Complex coefficient(int k) const;

  bool is_real(double tol = 1e-11) const;
  double sup_norm() const;
  Complex mean() const;

  // JSON: {"n": N, "samples": [[re, im], ...]}; round trip is bit exact.
  std::string to_json() const;
  static BoundaryFunction from_json(const std::string& text);

 private:
  struct Data {
    std::vector<Complex> samples;
    mutable std::once_flag coeffs_once;
    mutable std::vector<Complex> coeffs;
  };
  explicit BoundaryFunction(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  std::shared_ptr<const Data> data_;
};

// Pointwise algebra (sizes must match).
BoundaryFunction operator+(const BoundaryFunction& a, const BoundaryFunction& b);
BoundaryFunction operator-(const BoundaryFunction& a, const BoundaryFunction& b);
BoundaryFunction operator*(const BoundaryFunction& a, const BoundaryFunction& b);
BoundaryFunction operator*(Complex scale, const BoundaryFunction& a);
BoundaryFunction operator+(const BoundaryFunction& a, Complex shift);
BoundaryFunction real_part(const BoundaryFunction& a);
BoundaryFunction imag_part(const BoundaryFunction& a);
BoundaryFunction conjugate(const BoundaryFunction& a);
BoundaryFunction map_samples(const BoundaryFunction& a,
                             const std::function<Complex(Complex)>& f);

}  // namespace torusfill
