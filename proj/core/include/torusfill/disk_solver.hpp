#pragma once

#include <string>
#include <utility>
#include <vector>

#include "torusfill/boundary_function.hpp"
#include "torusfill/torus_family.hpp"

namespace torusfill {

struct SolverConfig {
  double tol = 1e-10;      // trace-residual target, sup norm
  int max_iter = 50;
  double damping = 1.0;    // initial step fraction in (0, 1]
  double t_step = 0.02;    // initial continuation step
  double min_step = 1e-5;  // continuation gives up below this
};

// A holomorphic graph disk w = g(lambda) whose boundary trace lies on the
// level-t torus.  Certificates are recorded at construction:
//   trace_residual  sup |F(lambda, g(lambda)) - t| over the boundary grid
//   holo_residual   negative-frequency energy of g
//   min_modulus     min |g| over boundary and a 32x32 polar interior grid
struct HolomorphicDisk {
  BoundaryFunction boundary;
  double level = 0.0;
  double trace_residual = 0.0;
  double holo_residual = 0.0;
  double min_modulus = 0.0;

  std::string to_json() const;
};

// One damped correction of the trace equation F(lambda, g(lambda)) = t.
// With (a, b) = log_branch(F_w o g) and X = e^{Hb - ib} (the unit normal
// direction field, phase-aligned so F_w X = e^{a + Hb} > 0), the linearized
// trace operator sends a real update u to 2 e^{a+Hb} u, so
//   du = -(R/2) e^{-a-Hb},   g_next = g + damping (du + iH du) X,
// all Hilbert transforms normalized to vanish at lambda = 1.  Returns
// (g_next, sup|R|).  Errors: NonzeroWinding when F_w o g winds about 0
// (the log has no branch); DegenerateGradient propagated.
std::pair<BoundaryFunction, double> newton_step(const TorusFamily& family, double t,
                                                const BoundaryFunction& g,
                                                double damping = 1.0);

// Iterate newton_step with residual-monotone damping until the trace
// residual drops below config.tol, then certify holomorphy, interior
// nonvanishing and zero winding.  Errors: NonzeroWinding (bad seed),
// NoConvergence, LeafHitZero (|g| collapses below 1e-8).
HolomorphicDisk solve_disk(const TorusFamily& family, double t,
                           const BoundaryFunction& g0, const SolverConfig& config = {});

// March the leaf from its own level to t1 with adaptive steps (halve on
// failure, regrow after success, floor at config.min_step), re-solving at
// each level from the previous boundary.  Returns every accepted level,
// starting leaf included.  Errors: ContinuationError (ContinuationStuck)
// carrying the last good level.
std::vector<HolomorphicDisk> continue_in_t(const TorusFamily& family,
                                           const HolomorphicDisk& leaf, double t1,
                                           const SolverConfig& config = {});

// sup over the boundary grid of d/dtheta F(e^{i theta}, g(e^{i theta}))
// assembled by the chain rule 2Re(i lambda F_lambda) + 2Re(F_w dg/dtheta);
// near zero certifies the differentiated trace equation.
double boundary_equation_residual(const TorusFamily& family, const HolomorphicDisk& disk);

struct DerivativeBoundReport {
  std::vector<double> per_disk;  // sup |dg/dtheta| for each path element
  double max_sup = 0.0;
  double median_sup = 0.0;
  double bound_factor = 10.0;
  bool passed = false;  // max_sup <= bound_factor * median_sup (+ slack at 0)

  std::string to_json() const;
};

// No-blow-up certificate for a continuation path: the largest boundary
// derivative must stay within bound_factor of the path median.
DerivativeBoundReport derivative_bound_check(const std::vector<HolomorphicDisk>& path,
                                             double bound_factor = 10.0);

}  // namespace torusfill
