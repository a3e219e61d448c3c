#pragma once

#include "torusfill/boundary_function.hpp"

namespace torusfill {

// Where the additive constant of a harmonic conjugate is fixed.
enum class HilbertNormalization {
  center,  // conjugate vanishes at the disk center (zero-mean output)
  at_one,  // conjugate vanishes at lambda = 1 (theta = 0)
};

// Harmonic conjugate of a real function: Fourier multiplier -i sign(k),
// then the normalization constant.  u + i H(u) extends holomorphically.
BoundaryFunction hilbert_transform(const BoundaryFunction& u,
                                   HilbertNormalization normalization);

// Relative l2 energy of the negative-frequency modes; 0 for holomorphic traces.
double holomorphy_residual(const BoundaryFunction& g);

// Power-series evaluation sum_{k>=0} c_k z^k for |z| <= 1.
// Requires holomorphy_residual(g) < tol, else NotHolomorphic.
Complex holomorphic_extension(const BoundaryFunction& g, Complex z,
                              double tol = 1e-8);

// Winding about 0 from principal-branch phase increments.  Errors:
// CurveThroughZero on a vanishing sample, Undersampled if any increment
// reaches max_phase_step.
int winding_number(const BoundaryFunction& curve, double max_phase_step = kPi / 2);

struct LogBranch {
  BoundaryFunction log_modulus;  // a = log |curve|
  BoundaryFunction argument;     // b, continuous, b(theta=0) in (-pi, pi]
};

// Continuous logarithm curve = exp(a + i b); requires winding 0.
LogBranch log_branch(const BoundaryFunction& curve);

// Spectral d/dtheta: coefficients multiplied by ik (Nyquist mode dropped so
// real inputs keep real derivatives).  Exact for band-limited inputs.
BoundaryFunction theta_derivative(const BoundaryFunction& u);

// Drop all negative-frequency modes (Nyquist included): the nearest trace
// of a holomorphic function in the sampled space.
BoundaryFunction holomorphic_projection(const BoundaryFunction& g);

// Trigonometric interpolation onto m samples (m power of two >= 16):
// zero-pad or truncate the spectrum.
BoundaryFunction resample(const BoundaryFunction& g, std::size_t m);

struct HolderEstimate {
  double alpha;
  double c0;        // sup |u|
  double c1;        // sup |u'|
  double seminorm;  // discrete alpha seminorm of u' (chordal distance)
  double total() const { return c0 + c1 + seminorm; }
};

// Discrete C^{1,alpha} norm: sup|u| + sup|u'| + sup |u'(x)-u'(y)| / |x-y|^alpha
// over sample pairs (|x-y| the chordal distance on the circle).  Exhaustive
// pair scan for N <= 512, strided subsampling above.
HolderEstimate holder_norm(const BoundaryFunction& u, double alpha);

}  // namespace torusfill
