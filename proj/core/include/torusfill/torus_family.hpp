#pragma once

#include <memory>
#include <string>
#include <vector>

#include "torusfill/common.hpp"

namespace torusfill {

// One term of a real trigonometric polynomial on the 2-torus: contributes
// Re(coeff * e^{i(k_arg*x + k_psi*psi)}) where x is the base-circle angle.
struct ProfileTerm {
  int k_arg = 0;
  int k_psi = 0;
  Complex coeff;
};

// Truncated double Fourier series: the radial profile r1(x, psi) of the
// outermost torus of a blended family.
class ProfileSeries {
 public:
  ProfileSeries() = default;
  explicit ProfileSeries(std::vector<ProfileTerm> terms);
  static ProfileSeries constant(double value);

  double value(double x, double psi) const;
  double d_arg(double x, double psi) const;
  double d_psi(double x, double psi) const;
  const std::vector<ProfileTerm>& terms() const { return terms_; }

 private:
  std::vector<ProfileTerm> terms_;
};

struct ValidationGrid {
  std::size_t n_lambda = 64;
  std::size_t n_psi = 64;
  std::size_t n_t = 24;
};

// Blueprint for the blended family
//   r(lambda, psi, t) = sqrt(t) * (1 + s(t) * (r1(arg lambda, psi) - 1)),
// where s is a C-infinity ramp with s(t) = 0 for t <= eps and s(1) = 1.
// Fibers at levels t <= eps are exact circles |w| = sqrt(t).
struct TorusFamilySpec {
  ProfileSeries profile;
  double eps = 0.05;
  double t_max = 1.0;
  ValidationGrid grid;

  std::string to_json() const;
  static TorusFamilySpec from_json(const std::string& text);
};

struct ValidationReport {
  bool passed = false;
  double min_radius = 0.0;           // min r over the grid; must be > 0
  double monotonicity_margin = 0.0;  // min dr/dt over the grid; must be > 0
  double collar_error = 0.0;         // max |r - sqrt(t)| for t <= eps; 0 expected
  double min_gradient = 0.0;         // min |F_w| over a coarsened grid
  bool winding_ok = false;           // every sampled fiber winds once about 0
  std::string failure;               // empty when passed

  std::string to_json() const;
};

// A family of nested star-shaped tori over the unit circle, carrying its
// defining function F = level(.) and finite-difference Wirtinger gradients.
// Instances are immutable once constructed and validated; every query is
// pure and safe to call concurrently.
class TorusFamily {
 public:
  virtual ~TorusFamily() = default;

  // Fiber radius over e^{ix} at angle psi, level t > 0.
  virtual double radius(double x, double psi, double t) const = 0;
  virtual double radius_dt(double x, double psi, double t) const = 0;
  virtual double radius_dpsi(double x, double psi, double t) const = 0;

  // Levels at or below this are exact circles |w| = sqrt(t).
  virtual double collar_level() const = 0;
  // Largest level the family is defined for.
  virtual double max_level() const = 0;
  // How far beyond max_level the level root-find may search (tabulated
  // families cannot extrapolate; analytic ones extend smoothly).
  virtual double level_cap() const { return max_level(); }

  // Point r(lambda, psi, t) e^{i psi} on the fiber curve.  OutOfRange for
  // t <= 0 or t > level_cap().
  Complex curve_point(Complex lambda, double psi, double t) const;

  // Defining function: the unique t with |w| = r(lambda, arg w, t), via a
  // safeguarded Newton iteration on u = sqrt(t) (monotonicity makes the
  // root unique).  Exactly |w|^2 in the collar.  Radial extension in
  // lambda: only arg(lambda) enters.  ZeroSection for w = 0.
  double level(Complex lambda, Complex w) const;

  struct Gradients {
    Complex f_w;
    Complex f_lambda;
  };
  // Wirtinger derivatives of level(.), by central finite differences with
  // step h = 1e-5 * max(1, |w|) unless a subclass supplies exact ones.
  // DegenerateGradient if |f_w| < 1e-8.
  virtual Gradients gradients(Complex lambda, Complex w) const;

  const ValidationReport& validated() const { return report_; }

 protected:
  ValidationReport report_;
};

// Grid checks: r > 0, dr/dt > 0, fibers wind once about 0, collar fibers
// are exact circles, |F_w| bounded away from 0.  Returns a failing report
// (with `failure` naming the violated property) instead of throwing.
ValidationReport validate_family(const TorusFamily& family, const ValidationGrid& grid);

// Validation outcome for a blueprint without exposing an unvalidated family.
ValidationReport validate_spec(const TorusFamilySpec& spec);

// Build and validate the blended family; throws FamilyValidationFailed
// (carrying the report's failure text) when validation does not pass.
std::shared_ptr<const TorusFamily> make_torus_family(TorusFamilySpec spec);

}  // namespace torusfill
