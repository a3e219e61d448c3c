#pragma once

#include <string>
#include <vector>

#include "torusfill/disk_solver.hpp"
#include "torusfill/torus_family.hpp"

namespace torusfill {

// Defining function of the torus family extended to the solid torus
// {|lambda| <= 1} x C: exactly |w|^2 inside the collar for any lambda;
// outside it, the radial level function of the base-circle fiber for
// |lambda| >= 0.85, the level function of the fiber over 1 for
// |lambda| <= 0.15, and a smooth blend on the annulus in between.
// Smooth, with nonvanishing w-gradient away from w = 0.
double extended_level(const TorusFamily& family, Complex lambda, Complex w);

enum class BarrierKind {
  phi,        // rho(F): increasing convex reshaping, subharmonic in w
  psi,        // c * rho~(ln F): concave log reshaping, superharmonic in w
  omega_eps,  // (1/eps)(|lambda|^2 - 1) + phi
  sigma_eps,  // (1/eps)(|lambda|^2 - 1) - psi
};

const char* barrier_kind_name(BarrierKind kind);

// A plurisubharmonicity barrier over the solid torus.  The convexifier is
// rho(x) = x + kappa (x^2 - x) (increasing convex on [0, t_max] for
// kappa in [0, 1), rho(0) = 0, rho(1) = 1) and the concavifier is
// rho~(x) = 1 + (1 - e^{-beta x}) / beta (increasing, strictly concave,
// rho~(0) = 1, rho~(-inf) = -inf).
struct Barrier {
  BarrierKind kind = BarrierKind::phi;
  double kappa = 0.5;    // convexifier curvature, in [0, 1)
  double beta = 2.0;     // concavifier curvature, > 0; must exceed the
                         // largest ratio (Laplacian of ln F) / |grad ln F|^2
                         // over the certification band, about 1.04 for the
                         // ten-percent profile families
  double scale_c = 1.0;  // psi multiplier; 1 puts the outermost torus at psi = 1
  double eps = 0.01;     // pseudoconvexity weight for omega_eps / sigma_eps
};

// Pointwise value of the barrier.  Errors: OutOfRange (|lambda| > 1),
// InvalidInput (bad kind parameters), ZeroSection (w = 0 for the
// logarithmic kinds psi / sigma_eps).
double evaluate_barrier(const Barrier& barrier, const TorusFamily& family, Complex lambda,
                        Complex w);

// Sample grid for the barrier sweeps: base angles x base radii (boundary,
// blend annulus, near-center) x fiber angles x fiber moduli.  Moduli
// bounds of 0 mean "derive from the family": from a third of the collar
// radius up to just past the outermost fiber radius.
struct BarrierGrid {
  std::size_t n_lambda = 12;
  std::vector<double> lambda_radii = {0.1, 0.45, 1.0};
  std::size_t n_psi = 16;
  std::size_t n_modulus = 8;
  double modulus_lo = 0.0;
  double modulus_hi = 0.0;
};

struct LaplacianSignReport {
  BarrierKind kind = BarrierKind::phi;
  bool passed = false;
  double margin = 0.0;  // min over the grid of the correctly-signed Laplacian
  double worst = 0.0;   // raw FD Laplacian at the worst grid point
  Complex worst_lambda;
  Complex worst_w;

  std::string to_json() const;
};

// Finite-difference Laplacian in w (central 5-point star, Richardson
// extrapolated) swept over the grid.  phi, omega_eps and sigma_eps must be
// subharmonic in w (Laplacian > 0), psi superharmonic (< 0); the report
// carries the worst margin and where it occurs.
LaplacianSignReport laplacian_sign_check(const Barrier& barrier, const TorusFamily& family,
                                         const BarrierGrid& grid = {});

// Minimum eigenvalue over the grid of the 2x2 complex Hessian
//   [ d^2/dl dl~   d^2/dl dw~ ]
//   [ d^2/dw dl~   d^2/dw dw~ ]
// of an omega_eps or sigma_eps barrier, by finite differences.  A positive
// value certifies strict plurisubharmonicity on the sampled region.
// Errors: InvalidInput for other kinds or eps <= 0.
double hessian_min_eigen(const Barrier& barrier, const TorusFamily& family,
                         const BarrierGrid& grid = {});

struct TrappingReport {
  double boundary_value = 0.0;    // max of omega over the boundary trace
  double max_interior = 0.0;      // max of omega over the interior polar grid
  double min_radial_slope = 0.0;  // smallest outward difference quotient at |lambda| = 1
  bool trapped = false;  // every value <= 1 + tol and the boundary slope positive

  std::string to_json() const;
};

// Evaluate omega_eps along the disk (interior values through the power
// series of the boundary trace) and check that the disk stays inside
// {omega_eps <= 1} with a strictly positive outward slope at the rim.
// Errors: InvalidInput unless the barrier kind is omega_eps.
TrappingReport trapping_check(const HolomorphicDisk& disk, const Barrier& barrier,
                              const TorusFamily& family);

}  // namespace torusfill
