#include "torusfill/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <json.hpp>

#include "torusfill/circle_ops.hpp"
#include "torusfill/errors.hpp"

namespace torusfill {
namespace {

// Blend window between the frozen-base level near lambda = 0 and the
// radial level function near the boundary circle.  A wide window keeps the
// second derivatives of the cutoff small, which keeps the lambda-lambda~
// Hessian entry of the barriers tame.
constexpr double kBlendLo = 0.15;
constexpr double kBlendWidth = 0.7;

double convexifier(double kappa, double x) { return x + kappa * (x * x - x); }

double concavifier(double beta, double x) { return 1.0 + (1.0 - std::exp(-beta * x)) / beta; }

void check_params(const Barrier& barrier) {
  if (!(barrier.kappa >= 0.0) || barrier.kappa >= 1.0)
    fail(ErrorCode::InvalidInput, "convexifier curvature must lie in [0, 1), got " +
                                      std::to_string(barrier.kappa));
  if (!(barrier.beta > 0.0))
    fail(ErrorCode::InvalidInput,
         "concavifier curvature must be positive, got " + std::to_string(barrier.beta));
  if ((barrier.kind == BarrierKind::omega_eps || barrier.kind == BarrierKind::sigma_eps) &&
      !(barrier.eps > 0.0))
    fail(ErrorCode::InvalidInput,
         "pseudoconvexity weight must be positive, got " + std::to_string(barrier.eps));
}

double phi_value(const Barrier& barrier, const TorusFamily& family, Complex lambda, Complex w) {
  return convexifier(barrier.kappa, extended_level(family, lambda, w));
}

double psi_value(const Barrier& barrier, const TorusFamily& family, Complex lambda, Complex w) {
  if (w == Complex(0.0, 0.0))
    fail(ErrorCode::ZeroSection, "the logarithmic barrier diverges on the zero section w = 0");
  return barrier.scale_c *
         concavifier(barrier.beta, std::log(extended_level(family, lambda, w)));
}

using PointFunction = std::function<double(Complex)>;

// Central 5-point Laplacian with one Richardson step: O(h^4) on smooth data.
double fd_laplacian(const PointFunction& f, Complex z, double h) {
  const double center = f(z);
  auto star = [&](double hh) {
    return (f(z + Complex(hh, 0.0)) + f(z - Complex(hh, 0.0)) + f(z + Complex(0.0, hh)) +
            f(z - Complex(0.0, hh)) - 4.0 * center) /
           (hh * hh);
  };
  const double coarse = star(h);
  const double fine = star(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

// Cross second difference d^2 f / da db for unit directions da, db.
double fd_cross(const std::function<double(Complex, Complex)>& f, Complex lambda, Complex w,
                Complex dw, Complex dl, double h) {
  return (f(lambda + h * dl, w + h * dw) - f(lambda - h * dl, w + h * dw) -
          f(lambda + h * dl, w - h * dw) + f(lambda - h * dl, w - h * dw)) /
         (4.0 * h * h);
}

std::vector<std::pair<Complex, Complex>> grid_points(const TorusFamily& family,
                                                     const BarrierGrid& grid) {
  double lo = grid.modulus_lo;
  double hi = grid.modulus_hi;
  if (lo <= 0.0) lo = std::sqrt(family.collar_level()) / 3.0;
  if (hi <= 0.0) {
    double outer = 0.0;
    for (int j = 0; j < 64; ++j)
      for (int k = 0; k < 64; ++k)
        outer = std::max(outer, family.radius(kTwoPi * j / 64.0, kTwoPi * k / 64.0,
                                              family.max_level()));
    hi = 1.02 * outer;  // certify over the band the disks actually live in
  }

  std::vector<std::pair<Complex, Complex>> points;
  for (std::size_t a = 0; a < grid.n_lambda; ++a) {
    const double x = kTwoPi * double(a) / double(grid.n_lambda);
    for (double radius : grid.lambda_radii) {
      const Complex lambda = std::polar(radius, x);
      for (std::size_t p = 0; p < grid.n_psi; ++p) {
        const double psi = kTwoPi * double(p) / double(grid.n_psi);
        for (std::size_t m = 0; m < grid.n_modulus; ++m) {
          const double mod =
              lo + (hi - lo) * double(m) / double(std::max<std::size_t>(1, grid.n_modulus - 1));
          points.emplace_back(lambda, std::polar(mod, psi));
        }
      }
    }
  }
  return points;
}

}  // namespace

const char* barrier_kind_name(BarrierKind kind) {
  switch (kind) {
    case BarrierKind::phi: return "phi";
    case BarrierKind::psi: return "psi";
    case BarrierKind::omega_eps: return "omega_eps";
    case BarrierKind::sigma_eps: return "sigma_eps";
  }
  return "unknown";
}

double extended_level(const TorusFamily& family, Complex lambda, Complex w) {
  const double m2 = std::norm(w);
  if (m2 <= family.collar_level()) return m2;  // exact collar at every base point
  const double s = std::abs(lambda);
  const double chi = smooth_ramp((s - kBlendLo) / kBlendWidth);
  // Near the center, freeze the base angle at 1: constant in lambda, hence
  // smooth across lambda = 0.  For base-independent families the two
  // branches coincide and the blend is exact everywhere.
  if (chi == 0.0) return family.level(Complex(1.0, 0.0), w);
  const double level = family.level(lambda / s, w);
  if (chi == 1.0) return level;
  return (1.0 - chi) * family.level(Complex(1.0, 0.0), w) + chi * level;
}

double evaluate_barrier(const Barrier& barrier, const TorusFamily& family, Complex lambda,
                        Complex w) {
  check_params(barrier);
  // Headroom of 1e-3 lets finite-difference probes straddle the rim; the
  // formulas extend smoothly since only arg(lambda) enters the level.
  if (std::abs(lambda) > 1.0 + 1e-3)
    fail(ErrorCode::OutOfRange,
         "barriers are defined over the closed unit disk, got |lambda| = " +
             std::to_string(std::abs(lambda)));
  switch (barrier.kind) {
    case BarrierKind::phi: return phi_value(barrier, family, lambda, w);
    case BarrierKind::psi: return psi_value(barrier, family, lambda, w);
    case BarrierKind::omega_eps:
      return (std::norm(lambda) - 1.0) / barrier.eps + phi_value(barrier, family, lambda, w);
    case BarrierKind::sigma_eps:
      return (std::norm(lambda) - 1.0) / barrier.eps - psi_value(barrier, family, lambda, w);
  }
  fail(ErrorCode::InvalidInput, "unknown barrier kind");
}

LaplacianSignReport laplacian_sign_check(const Barrier& barrier, const TorusFamily& family,
                                         const BarrierGrid& grid) {
  check_params(barrier);
  const double want_negative = barrier.kind == BarrierKind::psi ? -1.0 : 1.0;

  LaplacianSignReport report;
  report.kind = barrier.kind;
  report.margin = std::numeric_limits<double>::infinity();

  for (const auto& [lambda, w] : grid_points(family, grid)) {
    const PointFunction f = [&](Complex z) { return evaluate_barrier(barrier, family, lambda, z); };
    const double h = 1e-4 * std::max(1.0, std::abs(w));
    const double laplacian = fd_laplacian(f, w, h);
    const double margin = want_negative * laplacian;
    if (margin < report.margin) {
      report.margin = margin;
      report.worst = laplacian;
      report.worst_lambda = lambda;
      report.worst_w = w;
    }
  }
  report.passed = report.margin > 0.0;
  return report;
}

double hessian_min_eigen(const Barrier& barrier, const TorusFamily& family,
                         const BarrierGrid& grid) {
  check_params(barrier);
  if (barrier.kind != BarrierKind::omega_eps && barrier.kind != BarrierKind::sigma_eps)
    fail(ErrorCode::InvalidInput,
         "plurisubharmonicity certification applies to omega_eps / sigma_eps barriers");

  auto value = [&](Complex lambda, Complex w) {
    return evaluate_barrier(barrier, family, lambda, w);
  };

  double min_eigen = std::numeric_limits<double>::infinity();
  for (const auto& [lambda, w] : grid_points(family, grid)) {
    const double h = 1e-4;

    // Diagonal: quarter Laplacians are the d^2/dz dz~ entries.
    const PointFunction in_w = [&](Complex z) { return value(lambda, z); };
    const PointFunction in_l = [&](Complex z) { return value(z, w); };
    const double d_ww = 0.25 * fd_laplacian(in_w, w, h * std::max(1.0, std::abs(w)));
    const double d_ll = 0.25 * fd_laplacian(in_l, lambda, h);

    // Mixed entry d^2/dw dl~ = 1/4 [(D_xx + D_yy) + i (D_xy - D_yx)] from
    // the four real cross differences (x, y the real/imaginary parts).
    const auto cross = [&](Complex dw, Complex dl) {
      return fd_cross(value, lambda, w, dw, dl, h);
    };
    const double dxx = cross({1, 0}, {1, 0});
    const double dyy = cross({0, 1}, {0, 1});
    const double dxy = cross({1, 0}, {0, 1});
    const double dyx = cross({0, 1}, {1, 0});
    const Complex mixed = 0.25 * Complex(dxx + dyy, dxy - dyx);

    // Closed-form minimum eigenvalue of the 2x2 Hermitian matrix.
    const double mean = 0.5 * (d_ll + d_ww);
    const double split = std::hypot(0.5 * (d_ll - d_ww), std::abs(mixed));
    min_eigen = std::min(min_eigen, mean - split);
  }
  return min_eigen;
}

TrappingReport trapping_check(const HolomorphicDisk& disk, const Barrier& barrier,
                              const TorusFamily& family) {
  check_params(barrier);
  if (barrier.kind != BarrierKind::omega_eps)
    fail(ErrorCode::InvalidInput, "trapping is certified against an omega_eps barrier");

  auto omega = [&](Complex lambda, Complex w) {
    return evaluate_barrier(barrier, family, lambda, w);
  };

  TrappingReport report;
  const BoundaryFunction& g = disk.boundary;
  const std::size_t n = g.size();

  report.boundary_value = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    const Complex lambda = std::polar(1.0, g.theta(j));
    report.boundary_value = std::max(report.boundary_value, omega(lambda, g.sample(j)));
  }

  report.max_interior = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < 20; ++r) {
    const double radius = 0.95 * double(r) / 19.0;
    for (int k = 0; k < 32; ++k) {
      const Complex lambda = std::polar(radius, kTwoPi * k / 32.0);
      report.max_interior =
          std::max(report.max_interior, omega(lambda, holomorphic_extension(g, lambda)));
      if (radius == 0.0) break;  // the center is a single point
    }
  }

  // Hopf-style rim slope: outward difference quotient at |lambda| = 1.
  constexpr double kRimStep = 1e-3;
  report.min_radial_slope = std::numeric_limits<double>::infinity();
  const std::size_t stride = std::max<std::size_t>(1, n / 32);
  for (std::size_t j = 0; j < n; j += stride) {
    const Complex rim = std::polar(1.0, g.theta(j));
    const Complex inner = (1.0 - kRimStep) * rim;
    const double quotient =
        (omega(rim, g.sample(j)) - omega(inner, holomorphic_extension(g, inner))) / kRimStep;
    report.min_radial_slope = std::min(report.min_radial_slope, quotient);
  }

  report.trapped = std::max(report.boundary_value, report.max_interior) <= 1.0 + 1e-9 &&
                   report.min_radial_slope > 0.0;
  return report;
}

std::string LaplacianSignReport::to_json() const {
  nlohmann::json j;
  j["kind"] = barrier_kind_name(kind);
  j["passed"] = passed;
  j["margin"] = margin;
  j["worst_laplacian"] = worst;
  j["worst_lambda"] = {worst_lambda.real(), worst_lambda.imag()};
  j["worst_w"] = {worst_w.real(), worst_w.imag()};
  return j.dump();
}

std::string TrappingReport::to_json() const {
  nlohmann::json j;
  j["boundary_value"] = boundary_value;
  j["max_interior"] = max_interior;
  j["min_radial_slope"] = min_radial_slope;
  j["trapped"] = trapped;
  return j.dump();
}

}  // namespace torusfill
