#include "torusfill/torus_family.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "torusfill/errors.hpp"

namespace torusfill {

ProfileSeries::ProfileSeries(std::vector<ProfileTerm> terms) : terms_(std::move(terms)) {}

ProfileSeries ProfileSeries::constant(double value) {
  return ProfileSeries({{0, 0, Complex(value, 0.0)}});
}

double ProfileSeries::value(double x, double psi) const {
  double acc = 0.0;
  for (const auto& t : terms_)
    acc += (t.coeff * std::polar(1.0, t.k_arg * x + t.k_psi * psi)).real();
  return acc;
}

double ProfileSeries::d_arg(double x, double psi) const {
  double acc = 0.0;
  for (const auto& t : terms_)
    acc += (Complex(0.0, t.k_arg) * t.coeff * std::polar(1.0, t.k_arg * x + t.k_psi * psi))
               .real();
  return acc;
}

double ProfileSeries::d_psi(double x, double psi) const {
  double acc = 0.0;
  for (const auto& t : terms_)
    acc += (Complex(0.0, t.k_psi) * t.coeff * std::polar(1.0, t.k_arg * x + t.k_psi * psi))
               .real();
  return acc;
}

std::string TorusFamilySpec::to_json() const {
  nlohmann::json j;
  auto& prof = j["profile"] = nlohmann::json::object();
  for (const auto& t : profile.terms()) {
    const std::string key = std::to_string(t.k_arg) + "," + std::to_string(t.k_psi);
    prof[key] = {t.coeff.real(), t.coeff.imag()};
  }
  j["eps"] = eps;
  j["t_max"] = t_max;
  j["grid"] = {{"lambda", grid.n_lambda}, {"psi", grid.n_psi}, {"t", grid.n_t}};
  return j.dump();
}

TorusFamilySpec TorusFamilySpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidInput, std::string("bad JSON: ") + e.what());
  }
  if (!j.contains("profile") || !j["profile"].is_object())
    fail(ErrorCode::InvalidInput, "torus spec needs a profile object");
  TorusFamilySpec spec;
  std::vector<ProfileTerm> terms;
  for (auto it = j["profile"].begin(); it != j["profile"].end(); ++it) {
    ProfileTerm term;
    if (std::sscanf(it.key().c_str(), "%d,%d", &term.k_arg, &term.k_psi) != 2)
      fail(ErrorCode::InvalidInput,
           "profile keys are \"k_arg,k_psi\" frequency pairs, got \"" + it.key() + "\"");
    const auto& v = it.value();
    if (!v.is_array() || v.size() != 2)
      fail(ErrorCode::InvalidInput, "profile coefficients are [re, im] pairs");
    term.coeff = Complex(v[0].get<double>(), v[1].get<double>());
    terms.push_back(term);
  }
  spec.profile = ProfileSeries(std::move(terms));
  spec.eps = j.value("eps", 0.05);
  spec.t_max = j.value("t_max", 1.0);
  if (!(spec.eps > 0.0 && spec.eps < 1.0))
    fail(ErrorCode::OutOfRange, "eps must lie in (0, 1)");
  if (!(spec.t_max >= 1.0))
    fail(ErrorCode::OutOfRange, "t_max must be >= 1");
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    spec.grid.n_lambda = g.value("lambda", std::size_t(64));
    spec.grid.n_psi = g.value("psi", std::size_t(64));
    spec.grid.n_t = g.value("t", std::size_t(24));
  }
  return spec;
}

std::string ValidationReport::to_json() const {
  nlohmann::json j;
  j["passed"] = passed;
  j["min_radius"] = min_radius;
  j["monotonicity_margin"] = monotonicity_margin;
  j["collar_error"] = collar_error;
  j["min_gradient"] = min_gradient;
  j["winding_ok"] = winding_ok;
  j["failure"] = failure;
  return j.dump();
}

namespace {

// r = sqrt(t) * (1 + s(t) * (r1 - 1)); s ramps from 0 at eps to 1 at 1.
class BlendFamily final : public TorusFamily {
 public:
  explicit BlendFamily(TorusFamilySpec spec) : spec_(std::move(spec)) {}

  double radius(double x, double psi, double t) const override {
    const double s = smooth_ramp((t - spec_.eps) / (1.0 - spec_.eps));
    return std::sqrt(t) * (1.0 + s * (spec_.profile.value(x, psi) - 1.0));
  }

  double radius_dt(double x, double psi, double t) const override {
    const double u = (t - spec_.eps) / (1.0 - spec_.eps);
    const double s = smooth_ramp(u);
    const double ds = smooth_ramp_derivative(u) / (1.0 - spec_.eps);
    const double bump = spec_.profile.value(x, psi) - 1.0;
    return (1.0 + s * bump) / (2.0 * std::sqrt(t)) + std::sqrt(t) * ds * bump;
  }

  double radius_dpsi(double x, double psi, double t) const override {
    const double s = smooth_ramp((t - spec_.eps) / (1.0 - spec_.eps));
    return std::sqrt(t) * s * spec_.profile.d_psi(x, psi);
  }

  double collar_level() const override { return spec_.eps; }
  double max_level() const override { return spec_.t_max; }
  // The blend formula extends smoothly past t_max (the ramp is already 1),
  // so the root-find may search a generous margin for gradient stencils and
  // barrier grids that step outside the outermost torus.
  double level_cap() const override { return 8.0 * spec_.t_max; }

  void adopt_report(ValidationReport r) { report_ = std::move(r); }

  const TorusFamilySpec& spec() const { return spec_; }

 private:
  TorusFamilySpec spec_;
};

}  // namespace

Complex TorusFamily::curve_point(Complex lambda, double psi, double t) const {
  if (!(t > 0.0)) fail(ErrorCode::OutOfRange, "level t must be positive");
  if (t > level_cap())
    fail(ErrorCode::OutOfRange, "level t exceeds the family's range");
  if (lambda == 0.0) fail(ErrorCode::InvalidInput, "lambda must be nonzero");
  return std::polar(radius(std::arg(lambda), psi, t), psi);
}

double TorusFamily::level(Complex lambda, Complex w) const {
  if (w == 0.0)
    fail(ErrorCode::ZeroSection, "defining function is only a limit at w = 0");
  if (lambda == 0.0) fail(ErrorCode::InvalidInput, "lambda must be nonzero");
  const double m2 = std::norm(w);
  if (m2 <= collar_level()) return m2;  // collar fibers are exact circles

  const double x = std::arg(lambda);
  const double psi = std::arg(w);
  const double m = std::abs(w);
  const double tol = 1e-14 * std::max(1.0, m);

  // Bracket in u = sqrt(t): radius is u exactly at the collar edge (< m),
  // and grows monotonically, so expand upward until it passes m.
  const double u_cap = std::sqrt(level_cap());
  if (radius(x, psi, level_cap()) < m)
    fail(ErrorCode::OutOfRange, "point lies outside the outermost torus");
  double lo = std::sqrt(collar_level());
  double hi = std::min(std::max(m, lo), u_cap);
  while (radius(x, psi, hi * hi) < m) hi = std::min(1.25 * hi, u_cap);

  double u = std::clamp(m, lo, hi);
  for (int iter = 0; iter < 80; ++iter) {
    const double t = u * u;
    const double phi = radius(x, psi, t) - m;
    if (std::abs(phi) <= tol) return t;
    if (phi < 0.0)
      lo = u;
    else
      hi = u;
    const double slope = 2.0 * u * radius_dt(x, psi, t);
    double next = slope > 0.0 ? u - phi / slope : u;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    u = next;
  }
  fail(ErrorCode::NoConvergence, "level root-find stalled (family not monotone?)");
}

TorusFamily::Gradients TorusFamily::gradients(Complex lambda, Complex w) const {
  if (w == 0.0)
    fail(ErrorCode::ZeroSection, "gradients are undefined at w = 0");
  const double h = 1e-5 * std::max(1.0, std::abs(w));
  const Complex ih(0.0, h);

  const double fx = (level(lambda, w + h) - level(lambda, w - h)) / (2.0 * h);
  const double fy = (level(lambda, w + ih) - level(lambda, w - ih)) / (2.0 * h);
  const Complex f_w = 0.5 * Complex(fx, -fy);

  const double gx = (level(lambda + h, w) - level(lambda - h, w)) / (2.0 * h);
  const double gy = (level(lambda + ih, w) - level(lambda - ih, w)) / (2.0 * h);
  const Complex f_lambda = 0.5 * Complex(gx, -gy);

  if (std::abs(f_w) < 1e-8)
    fail(ErrorCode::DegenerateGradient,
         "|F_w| = " + std::to_string(std::abs(f_w)) + " below 1e-8");
  return {f_w, f_lambda};
}

namespace {

// Winding of a closed sample loop about 0 by phase increments; the fiber
// grids here are coarse, so no resolution guard is needed beyond positivity.
int loop_winding(const std::vector<Complex>& pts) {
  double total = 0.0;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    const Complex a = pts[j];
    const Complex b = pts[(j + 1) % pts.size()];
    if (a == 0.0 || std::abs(a) == 0.0) return std::numeric_limits<int>::min();
    total += std::arg(b / a);
  }
  return int(std::lround(total / kTwoPi));
}

}  // namespace

ValidationReport validate_family(const TorusFamily& family, const ValidationGrid& grid) {
  ValidationReport rep;
  rep.min_radius = std::numeric_limits<double>::infinity();
  rep.monotonicity_margin = std::numeric_limits<double>::infinity();
  rep.min_gradient = std::numeric_limits<double>::infinity();
  rep.winding_ok = true;

  const double eps = family.collar_level();
  const double t_max = family.max_level();
  const std::size_t nl = std::max<std::size_t>(grid.n_lambda, 4);
  const std::size_t np = std::max<std::size_t>(grid.n_psi, 8);
  const std::size_t nt = std::max<std::size_t>(grid.n_t, 4);

  std::vector<double> levels;
  for (std::size_t j = 1; j <= nt; ++j) levels.push_back(t_max * double(j) / double(nt));
  levels.push_back(0.5 * eps);
  levels.push_back(eps);

  for (std::size_t i = 0; i < nl; ++i) {
    const double x = kTwoPi * double(i) / double(nl);
    for (double t : levels) {
      std::vector<Complex> fiber(np);
      double fiber_min = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < np; ++k) {
        const double psi = kTwoPi * double(k) / double(np);
        const double r = family.radius(x, psi, t);
        fiber_min = std::min(fiber_min, r);
        rep.monotonicity_margin =
            std::min(rep.monotonicity_margin, family.radius_dt(x, psi, t));
        if (t <= eps)
          rep.collar_error =
              std::max(rep.collar_error, std::abs(r - std::sqrt(t)));
        fiber[k] = r * std::polar(1.0, psi);
      }
      rep.min_radius = std::min(rep.min_radius, fiber_min);
      if (fiber_min > 0.0 && loop_winding(fiber) != 1) rep.winding_ok = false;
    }
  }

  // |F_w| certified on a coarsened sub-grid (finite differences are the
  // costly part; the bound is a structural certificate, not a fine scan).
  if (rep.min_radius > 0.0 && rep.monotonicity_margin > 0.0) {
    const std::size_t sl = std::max<std::size_t>(1, nl / 8);
    const std::size_t sp = std::max<std::size_t>(1, np / 8);
    for (std::size_t i = 0; i < nl; i += sl) {
      const Complex lambda = std::polar(1.0, kTwoPi * double(i) / double(nl));
      for (std::size_t k = 0; k < np; k += sp) {
        const double psi = kTwoPi * double(k) / double(np);
        for (double t : {0.5 * eps, 0.5 * (eps + t_max), t_max}) {
          const Complex w = std::polar(family.radius(std::arg(lambda), psi, t), psi);
          try {
            rep.min_gradient =
                std::min(rep.min_gradient, std::abs(family.gradients(lambda, w).f_w));
          } catch (const Error&) {
            rep.min_gradient = 0.0;
          }
        }
      }
    }
  } else {
    rep.min_gradient = 0.0;
  }

  if (!(rep.min_radius > 0.0))
    rep.failure = "fiber radius must stay positive (profile dips to " +
                  std::to_string(rep.min_radius) + ")";
  else if (!(rep.monotonicity_margin > 0.0))
    rep.failure = "family must be strictly monotone in t (dr/dt dips to " +
                  std::to_string(rep.monotonicity_margin) + ")";
  else if (!rep.winding_ok)
    rep.failure = "every fiber must wind once about 0";
  else if (rep.collar_error > 0.0)
    rep.failure = "collar fibers must be exact circles (error " +
                  std::to_string(rep.collar_error) + ")";
  else if (!(rep.min_gradient >= 1e-8))
    rep.failure = "defining-function gradient degenerates (|F_w| min " +
                  std::to_string(rep.min_gradient) + ")";
  rep.passed = rep.failure.empty();
  return rep;
}

ValidationReport validate_spec(const TorusFamilySpec& spec) {
  BlendFamily candidate(spec);
  return validate_family(candidate, spec.grid);
}

std::shared_ptr<const TorusFamily> make_torus_family(TorusFamilySpec spec) {
  auto family = std::make_shared<BlendFamily>(std::move(spec));
  auto report = validate_family(*family, family->spec().grid);
  if (!report.passed)
    fail(ErrorCode::FamilyValidationFailed, report.failure);
  family->adopt_report(std::move(report));
  return family;
}

}  // namespace torusfill
