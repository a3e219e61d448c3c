#include "torusfill/disk_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "torusfill/circle_ops.hpp"
#include "torusfill/errors.hpp"

namespace torusfill {

namespace {

// sup over the boundary grid of |F(lambda_j, g_j) - t|.
double trace_residual_sup(const TorusFamily& family, double t, const BoundaryFunction& g) {
  double worst = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j)
    worst = std::max(worst, std::abs(family.level(g.lambda(j), g.sample(j)) - t));
  return worst;
}

// min |g| over the boundary samples and a 32x32 polar interior grid
// (center included) of the holomorphic extension.
double interior_min_modulus(const BoundaryFunction& g) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < g.size(); ++j) lo = std::min(lo, std::abs(g.sample(j)));
  for (std::size_t i = 0; i < 32; ++i) {
    const double rho = 0.97 * double(i) / 31.0;
    for (std::size_t k = 0; k < 32; ++k) {
      const Complex z = std::polar(rho, kTwoPi * double(k) / 32.0);
      lo = std::min(lo, std::abs(holomorphic_extension(g, z, 1e-6)));
      if (rho == 0.0) break;  // center needs a single sample
    }
  }
  return lo;
}

BoundaryFunction gradient_phase_curve(const TorusFamily& family,
                                      const BoundaryFunction& g) {
  std::vector<Complex> fw(g.size());
  for (std::size_t j = 0; j < g.size(); ++j)
    fw[j] = family.gradients(g.lambda(j), g.sample(j)).f_w;
  return BoundaryFunction::from_samples(std::move(fw));
}

}  // namespace

std::pair<BoundaryFunction, double> newton_step(const TorusFamily& family, double t,
                                                const BoundaryFunction& g,
                                                double damping) {
  const std::size_t n = g.size();
  std::vector<Complex> residual(n);
  for (std::size_t j = 0; j < n; ++j)
    residual[j] = family.level(g.lambda(j), g.sample(j)) - t;
  double res_norm = 0.0;
  for (const auto& r : residual) res_norm = std::max(res_norm, std::abs(r));

  const BoundaryFunction fw = gradient_phase_curve(family, g);
  auto [a, b] = log_branch(fw);  // NonzeroWinding when the hypothesis fails
  const BoundaryFunction hb = hilbert_transform(b, HilbertNormalization::at_one);

  // du solves 2 e^{a+Hb} du = -R pointwise.
  std::vector<Complex> du(n), x(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double expo = a.sample(j).real() + hb.sample(j).real();
    du[j] = -0.5 * residual[j].real() * std::exp(-expo);
    x[j] = std::exp(Complex(hb.sample(j).real(), -b.sample(j).real()));
  }
  const BoundaryFunction u = BoundaryFunction::from_samples(std::move(du));
  const BoundaryFunction hu = hilbert_transform(u, HilbertNormalization::at_one);

  std::vector<Complex> next(n);
  for (std::size_t j = 0; j < n; ++j)
    next[j] = g.sample(j) +
              damping * (u.sample(j).real() + Complex(0.0, 1.0) * hu.sample(j).real()) * x[j];
  return {BoundaryFunction::from_samples(std::move(next)), res_norm};
}

HolomorphicDisk solve_disk(const TorusFamily& family, double t,
                           const BoundaryFunction& g0, const SolverConfig& config) {
  if (!(t > 0.0) || t > family.level_cap())
    fail(ErrorCode::OutOfRange, "level t outside the family's range");
  const int w0 = winding_number(g0);  // CurveThroughZero / Undersampled gate
  if (w0 != 0)
    fail(ErrorCode::NonzeroWinding,
         "seed boundary winds " + std::to_string(w0) + " times about 0");

  BoundaryFunction g = holomorphic_projection(g0);
  double res = trace_residual_sup(family, t, g);
  double damping = config.damping;

  int iter = 0;
  while (res >= config.tol) {
    if (iter++ >= config.max_iter)
      fail(ErrorCode::NoConvergence,
           "trace residual " + std::to_string(res) + " after " +
               std::to_string(config.max_iter) + " iterations");
    auto [trial, unused] = newton_step(family, t, g, damping);
    (void)unused;
    const BoundaryFunction candidate = holomorphic_projection(trial);
    double trial_res;
    try {
      trial_res = trace_residual_sup(family, t, candidate);
    } catch (const Error&) {
      trial_res = std::numeric_limits<double>::infinity();  // stepped off the chart
    }
    if (trial_res < res) {
      g = candidate;
      res = trial_res;
      damping = config.damping;  // reset after an accepted step
    } else {
      damping *= 0.5;
      if (damping < 1e-7)
        fail(ErrorCode::NoConvergence,
             "damping underflow at residual " + std::to_string(res));
    }
  }

  HolomorphicDisk disk{g, t, res, holomorphy_residual(g), interior_min_modulus(g)};
  if (disk.min_modulus < 1e-8)
    fail(ErrorCode::LeafHitZero,
         "interior modulus " + std::to_string(disk.min_modulus) + " collapses");
  if (disk.holo_residual > 1e-9)
    fail(ErrorCode::NotHolomorphic,
         "converged boundary is not a holomorphic trace");
  if (winding_number(disk.boundary) != 0)
    fail(ErrorCode::NonzeroWinding, "converged boundary winds about 0");
  return disk;
}

std::vector<HolomorphicDisk> continue_in_t(const TorusFamily& family,
                                           const HolomorphicDisk& leaf, double t1,
                                           const SolverConfig& config) {
  if (!(t1 > 0.0) || t1 > family.level_cap())
    fail(ErrorCode::OutOfRange, "target level outside the family's range");
  std::vector<HolomorphicDisk> path{leaf};
  double t = leaf.level;
  double step = config.t_step;
  const double dir = t1 >= t ? 1.0 : -1.0;

  while (std::abs(t1 - t) > 1e-15) {
    const double t_next = dir > 0 ? std::min(t + step, t1) : std::max(t - step, t1);
    bool ok = false;
    try {
      path.push_back(solve_disk(family, t_next, path.back().boundary, config));
      ok = true;
    } catch (const Error& e) {
      if (is_input_error(e.code())) throw;  // not a convergence matter
      step *= 0.5;
      if (step < config.min_step)
        throw ContinuationError(
            "continuation step underflow below " + std::to_string(config.min_step) +
                " marching toward t = " + std::to_string(t1),
            t);
    }
    if (ok) {
      t = t_next;
      step = std::min(2.0 * step, config.t_step);  // regrow after success
    }
  }
  return path;
}

double boundary_equation_residual(const TorusFamily& family, const HolomorphicDisk& disk) {
  const BoundaryFunction& g = disk.boundary;
  const BoundaryFunction dg = theta_derivative(g);
  double worst = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const Complex lambda = g.lambda(j);
    const auto grad = family.gradients(lambda, g.sample(j));
    const double total = 2.0 * (Complex(0.0, 1.0) * lambda * grad.f_lambda).real() +
                         2.0 * (grad.f_w * dg.sample(j)).real();
    worst = std::max(worst, std::abs(total));
  }
  return worst;
}

DerivativeBoundReport derivative_bound_check(const std::vector<HolomorphicDisk>& path,
                                             double bound_factor) {
  if (path.empty()) fail(ErrorCode::InvalidInput, "empty continuation path");
  DerivativeBoundReport rep;
  rep.bound_factor = bound_factor;
  for (const auto& disk : path)
    rep.per_disk.push_back(theta_derivative(disk.boundary).sup_norm());
  rep.max_sup = *std::max_element(rep.per_disk.begin(), rep.per_disk.end());
  std::vector<double> sorted = rep.per_disk;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  rep.median_sup = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  // Absolute slack keeps the all-constants path (every sup ~ 0) passing.
  rep.passed = rep.max_sup <= bound_factor * rep.median_sup + 1e-12;
  return rep;
}

std::string HolomorphicDisk::to_json() const {
  nlohmann::json j;
  j["level"] = level;
  j["trace_residual"] = trace_residual;
  j["holo_residual"] = holo_residual;
  j["min_modulus"] = min_modulus;
  j["boundary"] = nlohmann::json::parse(boundary.to_json());
  return j.dump();
}

std::string DerivativeBoundReport::to_json() const {
  nlohmann::json j;
  j["per_disk"] = per_disk;
  j["max_sup"] = max_sup;
  j["median_sup"] = median_sup;
  j["bound_factor"] = bound_factor;
  j["passed"] = passed;
  return j.dump();
}

}  // namespace torusfill
