#include "torusfill/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include <json.hpp>

#include "torusfill/circle_ops.hpp"
#include "torusfill/errors.hpp"

namespace torusfill {
namespace {

Complex center_value(const HolomorphicDisk& disk) {
  // The holomorphic extension at z = 0 is the mean of the boundary trace.
  return disk.boundary.coefficient(0);
}

double wrap_angle(double xi) {
  xi = std::fmod(xi, kTwoPi);
  return xi < 0.0 ? xi + kTwoPi : xi;
}

// Winding about `about` of the closed polygon through the leaf centers.
// nullopt when a phase increment reaches pi/2: the polygon passes too
// close to `about` to trust, which during the level search simply means
// the sweeping curve is about to cross the target.
std::optional<int> center_winding(const std::vector<HolomorphicDisk>& bank, Complex about) {
  const std::size_t m = bank.size();
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const Complex z0 = center_value(bank[j]) - about;
    const Complex z1 = center_value(bank[(j + 1) % m]) - about;
    if (z0 == Complex(0.0, 0.0) || z1 == Complex(0.0, 0.0)) return std::nullopt;
    const double step = std::arg(z1 / z0);
    if (std::abs(step) >= kPi / 2) return std::nullopt;
    total += step;
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

// March every leaf of the bank to level t, in place.
void advance_bank(const TorusFamily& family, std::vector<HolomorphicDisk>& bank, double t,
                  const SolverConfig& solver) {
  for (auto& leaf : bank) {
    auto path = continue_in_t(family, leaf, t, solver);
    leaf = std::move(path.back());
  }
}

}  // namespace

Foliation build_foliation(std::shared_ptr<const TorusFamily> family, double t_target,
                          int leaf_count, const FoliationConfig& config) {
  if (!family) fail(ErrorCode::InvalidInput, "build_foliation requires a torus family");
  if (leaf_count < 8)
    fail(ErrorCode::InvalidInput,
         "build_foliation needs at least 8 leaves to certify a foliation, got " +
             std::to_string(leaf_count));
  if (!(t_target > 0.0) || t_target > family->max_level())
    fail(ErrorCode::OutOfRange, "foliation level " + std::to_string(t_target) +
                                    " outside (0, " + std::to_string(family->max_level()) + "]");

  const double eps = family->collar_level();
  const double seed_radius = std::sqrt(eps);

  Foliation foliation;
  foliation.family = family;
  foliation.level = t_target;
  foliation.anchors.reserve(leaf_count);
  foliation.leaves.reserve(leaf_count);
  foliation.continuation_steps.reserve(leaf_count);

  for (int m = 0; m < leaf_count; ++m) {
    const double xi = kTwoPi * double(m) / double(leaf_count);
    const auto seed =
        BoundaryFunction::constant(config.grid, seed_radius * std::polar(1.0, xi));
    try {
      HolomorphicDisk base = solve_disk(*family, eps, seed, config.solver);
      auto path = continue_in_t(*family, base, t_target, config.solver);
      foliation.continuation_steps.push_back(static_cast<int>(path.size()));
      foliation.leaves.push_back(std::move(path.back()));
    } catch (const ContinuationError& err) {
      throw ContinuationError("leaf " + std::to_string(m) + " (anchor " + std::to_string(xi) +
                                  "): " + err.what(),
                              err.last_good_t());
    }
    foliation.anchors.push_back(xi);
  }

  foliation.disjointness_margin = disjointness_check(foliation);
  foliation.min_transversality = transversality_angle(foliation);
  if (!(foliation.disjointness_margin > 0.0))
    fail(ErrorCode::FoliationDegenerate,
         "leaves are not pairwise disjoint (margin " +
             std::to_string(foliation.disjointness_margin) + ")");
  if (!(foliation.min_transversality > config.alpha_min))
    fail(ErrorCode::FoliationDegenerate,
         "minimum transversality angle " + std::to_string(foliation.min_transversality) +
             " at or below the threshold " + std::to_string(config.alpha_min));
  return foliation;
}

double disjointness_check(const Foliation& foliation) {
  const std::size_t m = foliation.leaves.size();
  if (m < 2) fail(ErrorCode::InvalidInput, "disjointness needs at least two leaves");

  // Shared sample set: the center, three interior rings, and a strided
  // boundary subgrid.  Leaves are holomorphic, so interior values come
  // from the power series of each boundary trace.
  std::vector<Complex> interior;
  interior.push_back(Complex(0.0, 0.0));
  for (double radius : {0.3, 0.6, 0.85})
    for (int k = 0; k < 16; ++k) interior.push_back(std::polar(radius, kTwoPi * k / 16.0));

  std::vector<std::vector<Complex>> values(m);
  for (std::size_t i = 0; i < m; ++i) {
    values[i].reserve(interior.size());
    for (const Complex& z : interior)
      values[i].push_back(holomorphic_extension(foliation.leaves[i].boundary, z));
  }

  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < interior.size(); ++p)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        margin = std::min(margin, std::abs(values[i][p] - values[j][p]));

  const std::size_t n = foliation.leaves[0].boundary.size();
  const std::size_t stride = std::max<std::size_t>(1, n / 64);
  for (std::size_t s = 0; s < n; s += stride)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        margin = std::min(margin, std::abs(foliation.leaves[i].boundary.sample(s) -
                                           foliation.leaves[j].boundary.sample(s)));
  return margin;
}

double transversality_angle(const Foliation& foliation) {
  if (foliation.leaves.empty() || !foliation.family)
    fail(ErrorCode::InvalidInput, "transversality needs a built foliation");
  const TorusFamily& family = *foliation.family;
  const double t = foliation.level;

  double min_angle = kPi / 2;
  for (const auto& leaf : foliation.leaves) {
    const BoundaryFunction dg = theta_derivative(leaf.boundary);
    const std::size_t n = leaf.boundary.size();
    for (std::size_t j = 0; j < n; ++j) {
      const double theta = leaf.boundary.theta(j);
      const Complex lambda = std::polar(1.0, theta);
      const Complex g = leaf.boundary.sample(j);
      const double psi = std::arg(g);

      // Trace tangent d/dtheta (lambda, g)  and  fiber tangent (0, d/dpsi).
      const Complex u1 = Complex(0.0, 1.0) * lambda;
      const Complex u2 = dg.sample(j);
      const Complex v2 = Complex(family.radius_dpsi(theta, psi, t), family.radius(theta, psi, t)) *
                         std::polar(1.0, psi);

      const double dot = (u2 * std::conj(v2)).real();  // u1 pairs with a zero slot
      const double nu = std::sqrt(std::norm(u1) + std::norm(u2));
      const double nv = std::abs(v2);
      if (nu == 0.0 || nv == 0.0) return 0.0;
      const double c = std::clamp(std::abs(dot) / (nu * nv), 0.0, 1.0);
      min_angle = std::min(min_angle, std::acos(c));
    }
  }
  return min_angle;
}

LeafLocation leaf_through_point(std::shared_ptr<const TorusFamily> family, Complex w0,
                                const FoliationConfig& config) {
  if (!family) fail(ErrorCode::InvalidInput, "leaf_through_point requires a torus family");
  if (w0 == Complex(0.0, 0.0))
    fail(ErrorCode::InvalidInput,
         "leaf_through_point requires w0 != 0: the zero section meets no fiber and no leaf");

  const double eps = family->collar_level();
  const double t_max = family->max_level();
  const double seed_radius = std::sqrt(eps);
  const SolverConfig& solver = config.solver;

  // Collar: every fiber is the circle |w| = sqrt(t), so the leaf through
  // w0 is the constant disk at level |w0|^2.
  if (std::norm(w0) <= eps) {
    const auto seed = BoundaryFunction::constant(config.grid, w0);
    HolomorphicDisk leaf = solve_disk(*family, std::norm(w0), seed, solver);
    return {std::norm(w0), wrap_angle(std::arg(w0)), std::move(leaf)};
  }

  // March a bank of anchors upward until the center curve encloses w0.
  const int bank_size = std::max(16, config.probe_leaves);
  std::vector<HolomorphicDisk> bank_lo;
  bank_lo.reserve(bank_size);
  for (int m = 0; m < bank_size; ++m) {
    const double xi = kTwoPi * double(m) / double(bank_size);
    const auto seed =
        BoundaryFunction::constant(config.grid, seed_radius * std::polar(1.0, xi));
    bank_lo.push_back(solve_disk(*family, eps, seed, solver));
  }

  double t_lo = eps;
  double t_hi = std::numeric_limits<double>::quiet_NaN();
  std::vector<HolomorphicDisk> bank_hi;
  const double march_step = (t_max - eps) / 24.0;
  while (t_lo < t_max - 1e-15) {
    const double t_next = std::min(t_lo + march_step, t_max);
    std::vector<HolomorphicDisk> bank = bank_lo;
    advance_bank(*family, bank, t_next, solver);
    const auto winding = center_winding(bank, w0);
    if (!winding.has_value() || *winding != 0) {
      t_hi = t_next;
      bank_hi = std::move(bank);
      break;
    }
    t_lo = t_next;
    bank_lo = std::move(bank);
  }
  if (std::isnan(t_hi))  // never crossed: w0 lies outside the swept region
    fail(ErrorCode::PointNotEnclosed,
         "the torus family sweeps past max level " + std::to_string(t_max) +
             " without enclosing the requested point");

  // Bisect the crossing level until the bracket is tight enough to seed
  // the local refinement.
  while (t_hi - t_lo > 1e-3) {
    const double t_mid = 0.5 * (t_lo + t_hi);
    std::vector<HolomorphicDisk> bank = bank_lo;
    advance_bank(*family, bank, t_mid, solver);
    const auto winding = center_winding(bank, w0);
    if (winding.has_value() && *winding == 0) {
      t_lo = t_mid;
      bank_lo = std::move(bank);
    } else {
      t_hi = t_mid;
      bank_hi = std::move(bank);
    }
  }

  // Starting guess: the bracket midpoint and the anchor whose center is
  // nearest to w0 at the enclosing level.
  std::size_t best = 0;
  for (std::size_t m = 1; m < bank_hi.size(); ++m)
    if (std::abs(center_value(bank_hi[m]) - w0) < std::abs(center_value(bank_hi[best]) - w0))
      best = m;

  double t = 0.5 * (t_lo + t_hi);
  double xi = kTwoPi * double(best) / double(bank_size);

  // G(t, xi) = g_xi^t(0) - w0, evaluated by marching a fresh leaf from its
  // collar anchor so the label stays the continuation label.
  auto evaluate = [&](double tt, double xx) -> std::pair<Complex, HolomorphicDisk> {
    const auto seed =
        BoundaryFunction::constant(config.grid, seed_radius * std::polar(1.0, xx));
    HolomorphicDisk base = solve_disk(*family, eps, seed, solver);
    auto path = continue_in_t(*family, base, tt, solver);
    HolomorphicDisk leaf = std::move(path.back());
    return {center_value(leaf) - w0, std::move(leaf)};
  };

  auto [residual, located] = evaluate(t, xi);
  const double fd = 1e-5;
  for (int iter = 0; iter < 24 && std::abs(residual) >= 0.5 * config.point_tol; ++iter) {
    const double dt = (t + fd <= t_max) ? fd : -fd;
    const Complex gt = (evaluate(t + dt, xi).first - residual) / dt;
    const Complex gx = (evaluate(t, xi + fd).first - residual) / fd;

    const double det = gt.real() * gx.imag() - gt.imag() * gx.real();
    if (std::abs(det) < 1e-14) break;
    const double step_t = (-residual.real() * gx.imag() + residual.imag() * gx.real()) / det;
    const double step_x = (-gt.real() * residual.imag() + gt.imag() * residual.real()) / det;

    double damping = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 8; ++halving) {
      const double t_trial = std::clamp(t + damping * step_t, eps, t_max);
      const double xi_trial = xi + damping * step_x;
      auto [trial, trial_leaf] = evaluate(t_trial, xi_trial);
      if (std::abs(trial) < std::abs(residual)) {
        t = t_trial;
        xi = xi_trial;
        residual = trial;
        located = std::move(trial_leaf);
        accepted = true;
        break;
      }
      damping *= 0.5;
    }
    if (!accepted) break;
  }

  if (!(std::abs(residual) < config.point_tol))
    fail(ErrorCode::TargetToleranceMissed,
         "leaf center missed the requested point by " + std::to_string(std::abs(residual)) +
             " (tolerance " + std::to_string(config.point_tol) + ")");
  return {t, wrap_angle(xi), std::move(located)};
}

double uniqueness_probe(const TorusFamily& family, double t, const HolomorphicDisk& leaf,
                        double perturbation_scale, const SolverConfig& config) {
  const BoundaryFunction& g = leaf.boundary;
  const std::size_t n = g.size();

  // A fixed smooth holomorphic perturbation; the solver may drift to a
  // neighbouring leaf, which the re-anchoring below undoes.
  const auto bump = BoundaryFunction::from_function(n, [&](double theta) {
    const Complex z = std::polar(1.0, theta);
    return perturbation_scale * (0.4 + Complex(0.5, 0.3) * z + Complex(0.25, -0.35) * z * z * z);
  });
  HolomorphicDisk h = solve_disk(family, t, g + bump, config);

  // Re-anchor by constant shifts until the two traces agree at lambda = 1
  // (sample 0); on nested star-shaped families the shift map contracts.
  const Complex target = g.sample(0);
  for (int iter = 0; iter < 12; ++iter) {
    const Complex miss = target - h.boundary.sample(0);
    if (std::abs(miss) < 1e-13) break;
    h = solve_disk(family, t, h.boundary + miss, config);
  }

  double sup = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    sup = std::max(sup, std::abs(g.sample(j) - h.boundary.sample(j)));
  return sup;
}

std::string Foliation::to_json() const {
  nlohmann::json j;
  j["level"] = level;
  j["leaf_count"] = leaves.size();
  j["anchors"] = anchors;
  j["continuation_steps"] = continuation_steps;
  j["disjointness_margin"] = disjointness_margin;
  j["min_transversality_angle"] = min_transversality;
  j["leaves"] = nlohmann::json::array();
  for (const auto& leaf : leaves) j["leaves"].push_back(nlohmann::json::parse(leaf.to_json()));
  return j.dump();
}

}  // namespace torusfill
