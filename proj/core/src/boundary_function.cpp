#include "torusfill/boundary_function.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "torusfill/errors.hpp"
#include "torusfill/fft.hpp"

namespace torusfill {

namespace {
void check_grid(std::size_t n) {
  if (n < BoundaryFunction::kMinGrid || !fft::is_power_of_two(n))
    fail(ErrorCode::InvalidGrid,
         "grid size must be a power of two >= 16, got " + std::to_string(n));
}
}  // namespace

BoundaryFunction BoundaryFunction::from_samples(std::vector<Complex> samples) {
  check_grid(samples.size());
  auto data = std::make_shared<Data>();
  data->samples = std::move(samples);
  return BoundaryFunction(std::move(data));
}

BoundaryFunction BoundaryFunction::constant(std::size_t n, Complex value) {
  return from_samples(std::vector<Complex>(n, value));
}

BoundaryFunction BoundaryFunction::from_function(
    std::size_t n, const std::function<Complex(double)>& f) {
  check_grid(n);
  std::vector<Complex> samples(n);
  for (std::size_t j = 0; j < n; ++j) samples[j] = f(kTwoPi * double(j) / double(n));
  return from_samples(std::move(samples));
}

BoundaryFunction BoundaryFunction::from_coefficients(std::vector<Complex> dft_coeffs) {
  check_grid(dft_coeffs.size());
  return from_samples(fft::synthesize(std::move(dft_coeffs)));
}

Complex BoundaryFunction::lambda(std::size_t j) const {
  return std::polar(1.0, theta(j));
}

std::span<const Complex> BoundaryFunction::coefficients() const {
  std::call_once(data_->coeffs_once, [this] {
    data_->coeffs = fft::analyze(data_->samples);
  });
  return data_->coeffs;
}

Complex BoundaryFunction::coefficient(int k) const {
  const int n = int(size());
  if (k < -n / 2 || k >= n / 2)
    fail(ErrorCode::OutOfRange, "coefficient index outside [-N/2, N/2)");
  auto c = coefficients();
  return c[std::size_t((k + n) % n)];
}

bool BoundaryFunction::is_real(double tol) const {
  double scale = 0.0, worst = 0.0;
  for (const auto& s : data_->samples) {
    scale = std::max(scale, std::abs(s));
    worst = std::max(worst, std::abs(s.imag()));
  }
  return worst <= tol * std::max(1.0, scale);
}

double BoundaryFunction::sup_norm() const {
  double m = 0.0;
  for (const auto& s : data_->samples) m = std::max(m, std::abs(s));
  return m;
}

Complex BoundaryFunction::mean() const {
  Complex acc = 0.0;
  for (const auto& s : data_->samples) acc += s;
  return acc / double(size());
}

std::string BoundaryFunction::to_json() const {
  nlohmann::json j;
  j["n"] = size();
  auto& arr = j["samples"] = nlohmann::json::array();
  for (const auto& s : data_->samples) arr.push_back({s.real(), s.imag()});
  return j.dump();
}

BoundaryFunction BoundaryFunction::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidInput, std::string("bad JSON: ") + e.what());
  }
  if (!j.contains("n") || !j.contains("samples") || !j["samples"].is_array())
    fail(ErrorCode::InvalidInput, "boundary function JSON needs fields n, samples");
  std::vector<Complex> samples;
  samples.reserve(j["samples"].size());
  for (const auto& entry : j["samples"]) {
    if (!entry.is_array() || entry.size() != 2)
      fail(ErrorCode::InvalidInput, "samples must be [re, im] pairs");
    samples.emplace_back(entry[0].get<double>(), entry[1].get<double>());
  }
  if (samples.size() != j["n"].get<std::size_t>())
    fail(ErrorCode::InvalidInput, "sample count disagrees with field n");
  return from_samples(std::move(samples));
}

namespace {
BoundaryFunction zip(const BoundaryFunction& a, const BoundaryFunction& b,
                     Complex (*op)(Complex, Complex)) {
  if (a.size() != b.size()) fail(ErrorCode::InvalidGrid, "grid sizes differ");
  std::vector<Complex> out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = op(a.sample(j), b.sample(j));
  return BoundaryFunction::from_samples(std::move(out));
}
}  // namespace

BoundaryFunction operator+(const BoundaryFunction& a, const BoundaryFunction& b) {
  return zip(a, b, +[](Complex x, Complex y) { return x + y; });
}
BoundaryFunction operator-(const BoundaryFunction& a, const BoundaryFunction& b) {
  return zip(a, b, +[](Complex x, Complex y) { return x - y; });
}
BoundaryFunction operator*(const BoundaryFunction& a, const BoundaryFunction& b) {
  return zip(a, b, +[](Complex x, Complex y) { return x * y; });
}
BoundaryFunction operator*(Complex scale, const BoundaryFunction& a) {
  return map_samples(a, [scale](Complex x) { return scale * x; });
}
BoundaryFunction operator+(const BoundaryFunction& a, Complex shift) {
  return map_samples(a, [shift](Complex x) { return x + shift; });
}
BoundaryFunction real_part(const BoundaryFunction& a) {
  return map_samples(a, [](Complex x) { return Complex(x.real(), 0.0); });
}
BoundaryFunction imag_part(const BoundaryFunction& a) {
  return map_samples(a, [](Complex x) { return Complex(x.imag(), 0.0); });
}
BoundaryFunction conjugate(const BoundaryFunction& a) {
  return map_samples(a, [](Complex x) { return std::conj(x); });
}

BoundaryFunction map_samples(const BoundaryFunction& a,
                             const std::function<Complex(Complex)>& f) {
  std::vector<Complex> out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = f(a.sample(j));
  return BoundaryFunction::from_samples(std::move(out));
}

}  // namespace torusfill
