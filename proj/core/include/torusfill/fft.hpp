#pragma once

#include <vector>

#include "torusfill/common.hpp"

namespace torusfill::fft {

// In-place radix-2 transform; size must be a power of two.
// forward: X_k = sum_j x_j e^{-2 pi i jk/N}   (no scaling)
// inverse: x_j = sum_k X_k e^{+2 pi i jk/N}   (no scaling)
void transform(std::vector<Complex>& data, bool inverse);

// Fourier coefficients of samples at theta_j = 2 pi j / N, natural DFT
// order (k = 0..N-1; k >= N/2 aliases k - N):  c_k = (1/N) sum s_j e^{-ik theta_j}.
std::vector<Complex> analyze(std::vector<Complex> samples);

// Inverse of analyze: samples s_j = sum_k c_k e^{+ik theta_j}.
std::vector<Complex> synthesize(std::vector<Complex> coeffs);

bool is_power_of_two(std::size_t n);

}  // namespace torusfill::fft
