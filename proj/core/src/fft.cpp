#include "torusfill/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "torusfill/errors.hpp"

namespace torusfill::fft {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace {

// Twiddle table for size n: w[j] = e^{-2 pi i j / n}, j < n/2.
std::shared_ptr<const std::vector<Complex>> twiddles(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const std::vector<Complex>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto table = std::make_shared<std::vector<Complex>>(n / 2);
  for (std::size_t j = 0; j < n / 2; ++j) {
    const double ang = -kTwoPi * double(j) / double(n);
    (*table)[j] = Complex(std::cos(ang), std::sin(ang));
  }
  cache.emplace(n, table);
  return table;
}

}  // namespace

void transform(std::vector<Complex>& data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) fail(ErrorCode::InvalidGrid, "transform size must be a power of two");
  if (n == 1) return;

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  const auto table = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < len / 2; ++j) {
        Complex w = (*table)[j * stride];
        if (inverse) w = std::conj(w);
        const Complex u = data[i + j];
        const Complex v = data[i + j + len / 2] * w;
        data[i + j] = u + v;
        data[i + j + len / 2] = u - v;
      }
    }
  }
}

std::vector<Complex> analyze(std::vector<Complex> samples) {
  const double inv_n = 1.0 / double(samples.size());
  transform(samples, /*inverse=*/false);
  for (auto& c : samples) c *= inv_n;
  return samples;
}

std::vector<Complex> synthesize(std::vector<Complex> coeffs) {
  transform(coeffs, /*inverse=*/true);
  return coeffs;
}

}  // namespace torusfill::fft
