#include "torusfill/motion.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "torusfill/circle_ops.hpp"
#include "torusfill/errors.hpp"
#include "torusfill/fft.hpp"

namespace torusfill {
namespace {

Complex parse_complex(const nlohmann::json& entry, const char* what) {
  if (!entry.is_array() || entry.size() != 2)
    fail(ErrorCode::InvalidInput, std::string(what) + " must be [re, im] pairs");
  return {entry[0].get<double>(), entry[1].get<double>()};
}

nlohmann::json dump_complex(Complex z) { return {z.real(), z.imag()}; }

// Dense complex linear solve by Gaussian elimination with partial pivoting;
// the systems here are tiny (point count + 1).
std::vector<Complex> solve_dense(std::vector<std::vector<Complex>> a, std::vector<Complex> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < n; ++row)
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    if (std::abs(a[pivot][col]) < 1e-14)
      fail(ErrorCode::DegenerateGradient, "velocity interpolation system is singular");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t row = col + 1; row < n; ++row) {
      const Complex factor = a[row][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[row][k] -= factor * a[col][k];
      b[row] -= factor * b[col];
    }
  }
  std::vector<Complex> x(n);
  for (std::size_t row = n; row-- > 0;) {
    Complex acc = b[row];
    for (std::size_t k = row + 1; k < n; ++k) acc -= a[row][k] * x[k];
    x[row] = acc / a[row][row];
  }
  return x;
}

double wrap_angle(double x) {
  x = std::fmod(x, kTwoPi);
  if (x < 0.0) x += kTwoPi;
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// Spec plumbing

Complex HolomorphicMotionSpec::value(std::size_t i, Complex lambda) const {
  if (i >= points.size()) fail(ErrorCode::OutOfRange, "point index out of range");
  Complex acc = 0.0;
  const auto& series = trajectories[i];
  for (std::size_t k = series.size(); k-- > 0;) acc = (acc + series[k]) * lambda;
  return points[i] + acc;
}

Complex HolomorphicMotionSpec::radial_velocity(std::size_t i, double r, double theta) const {
  if (i >= points.size()) fail(ErrorCode::OutOfRange, "point index out of range");
  const Complex phase = std::polar(1.0, theta);
  const auto& series = trajectories[i];
  // d/dr sum_k c_k r^k e^{ik theta} = sum_k k c_k r^{k-1} e^{ik theta}
  Complex acc = 0.0;
  Complex lam_pow = phase;  // e^{ik theta} r^{k-1} at k = 1
  for (std::size_t k = 1; k <= series.size(); ++k) {
    acc += double(k) * series[k - 1] * lam_pow;
    lam_pow *= r * phase;
  }
  return acc;
}

std::string HolomorphicMotionSpec::to_json() const {
  nlohmann::json j;
  j["r0"] = sample_radius;
  auto& pts = j["points"] = nlohmann::json::array();
  for (const auto& p : points) pts.push_back(dump_complex(p));
  auto& trs = j["trajectories"] = nlohmann::json::array();
  for (const auto& series : trajectories) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& c : series) row.push_back(dump_complex(c));
    trs.push_back(std::move(row));
  }
  return j.dump();
}

HolomorphicMotionSpec HolomorphicMotionSpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidInput, std::string("bad JSON: ") + e.what());
  }
  if (!j.contains("points") || !j["points"].is_array() || !j.contains("trajectories") ||
      !j["trajectories"].is_array())
    fail(ErrorCode::InvalidInput, "motion JSON needs points and trajectories arrays");
  HolomorphicMotionSpec spec;
  spec.sample_radius = j.value("r0", 0.9);
  for (const auto& entry : j["points"]) spec.points.push_back(parse_complex(entry, "points"));
  for (const auto& row : j["trajectories"]) {
    if (!row.is_array())
      fail(ErrorCode::InvalidInput, "each trajectory is an array of coefficients");
    std::vector<Complex> series;
    for (const auto& entry : row) series.push_back(parse_complex(entry, "coefficients"));
    spec.trajectories.push_back(std::move(series));
  }
  validate_motion(spec);
  return spec;
}

void validate_motion(const HolomorphicMotionSpec& spec) {
  if (spec.points.empty()) fail(ErrorCode::InvalidInput, "motion needs at least one point");
  if (spec.points.size() != spec.trajectories.size())
    fail(ErrorCode::InvalidInput, "every point needs exactly one trajectory");
  if (!(spec.sample_radius > 0.0) || spec.sample_radius >= 1.0)
    fail(ErrorCode::OutOfRange, "sample radius must lie in (0, 1)");
  const std::size_t n = spec.points.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(spec.points[i] - spec.points[j]) < 1e-9)
        fail(ErrorCode::PointsCollide,
             "points " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
  // Injectivity sweep over a polar grid of the sampled disk.
  for (double frac : {0.25, 0.5, 0.75, 1.0}) {
    for (int a = 0; a < 16; ++a) {
      const Complex lambda = std::polar(frac * spec.sample_radius, kTwoPi * a / 16.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (std::abs(spec.value(i, lambda) - spec.value(j, lambda)) < 1e-9)
            fail(ErrorCode::PointsCollide,
                 "trajectories " + std::to_string(i) + " and " + std::to_string(j) +
                     " cross near lambda = (" + std::to_string(lambda.real()) + ", " +
                     std::to_string(lambda.imag()) + ")");
    }
  }
}

// ---------------------------------------------------------------------------
// Normalization

Complex MotionNormalization::pivot_value(Complex lambda) const {
  Complex acc = 0.0;
  for (std::size_t k = pivot_series.size(); k-- > 0;) acc = (acc + pivot_series[k]) * lambda;
  return pivot + acc;
}

std::pair<HolomorphicMotionSpec, MotionNormalization> normalize_motion(
    const HolomorphicMotionSpec& spec) {
  validate_motion(spec);
  MotionNormalization frame;
  frame.pivot = spec.points[0];
  frame.pivot_series = spec.trajectories[0];

  HolomorphicMotionSpec out;
  out.sample_radius = spec.sample_radius;
  out.points.reserve(spec.points.size());
  out.trajectories.reserve(spec.points.size());
  for (std::size_t i = 0; i < spec.points.size(); ++i) {
    out.points.push_back(spec.points[i] - frame.pivot);
    const auto& mine = spec.trajectories[i];
    const auto& pivots = frame.pivot_series;
    std::vector<Complex> series(std::max(mine.size(), pivots.size()), Complex(0.0));
    for (std::size_t k = 0; k < mine.size(); ++k) series[k] += mine[k];
    for (std::size_t k = 0; k < pivots.size(); ++k) series[k] -= pivots[k];
    while (!series.empty() && std::abs(series.back()) == 0.0) series.pop_back();
    out.trajectories.push_back(std::move(series));
  }
  return {std::move(out), std::move(frame)};
}

// ---------------------------------------------------------------------------
// Velocity field

Complex VelocityField::operator()(Complex w) const {
  Complex acc = linear * w;
  for (std::size_t j = 0; j < sites.size(); ++j) {
    const double d = std::abs(w - sites[j]);
    const double x = d / shape;
    acc += weights[j] / (1.0 + x * x);
  }
  const double m = std::abs(w);
  if (m > taper_radius) {
    const double excess = (m - taper_radius) / taper_radius;
    acc /= 1.0 + excess * excess;
  }
  return acc;
}

VelocityField build_velocity_field(const HolomorphicMotionSpec& normalized, double r,
                                   double theta) {
  const std::size_t n = normalized.points.size();
  VelocityField field;
  field.sites.reserve(n + 1);
  std::vector<Complex> velocities;
  velocities.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    field.sites.push_back(normalized.value(i, std::polar(r, theta)));
    velocities.push_back(normalized.radial_velocity(i, r, theta));
  }
  // The motion pins 0; make sure the field does too, even if the caller's
  // spec does not list the pinned point.
  bool has_origin = false;
  for (const auto& p : field.sites) has_origin = has_origin || std::abs(p) < 1e-12;
  if (!has_origin) {
    field.sites.push_back(Complex(0.0));
    velocities.push_back(Complex(0.0));
  }

  const std::size_t m = field.sites.size();
  double min_sep = std::numeric_limits<double>::infinity();
  double max_mod = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    max_mod = std::max(max_mod, std::abs(field.sites[i]));
    for (std::size_t j = i + 1; j < m; ++j)
      min_sep = std::min(min_sep, std::abs(field.sites[i] - field.sites[j]));
  }
  if (m > 1 && min_sep < 1e-9)
    fail(ErrorCode::PointsCollide, "two trajectories are closer than 1e-9 at r = " +
                                       std::to_string(r));

  field.shape = m > 1 ? 0.5 * min_sep : 1.0;
  field.taper_radius = 4.0 * std::max(max_mod, 0.25);

  bool all_zero = true;
  for (const auto& v : velocities) all_zero = all_zero && std::abs(v) == 0.0;
  if (all_zero || m == 1) {
    field.weights.assign(m, Complex(0.0));
    field.linear = 0.0;
    field.lipschitz = 0.0;
    return field;
  }

  // Interpolation block plus the complex-linear tail and its vanishing
  // moment: [K p; conj(p)^T 0] (alpha, beta) = (v, 0).
  std::vector<std::vector<Complex>> a(m + 1, std::vector<Complex>(m + 1, Complex(0.0)));
  std::vector<Complex> b(m + 1, Complex(0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double x = std::abs(field.sites[i] - field.sites[j]) / field.shape;
      a[i][j] = 1.0 / (1.0 + x * x);
    }
    a[i][m] = field.sites[i];
    a[m][i] = std::conj(field.sites[i]);
    b[i] = velocities[i];
  }
  auto solution = solve_dense(std::move(a), std::move(b));
  field.weights.assign(solution.begin(), solution.begin() + m);
  field.linear = solution[m];

  double weight_mass = 0.0;
  for (const auto& alpha : field.weights) weight_mass += std::abs(alpha);
  // max |K'| for the inverse-quadratic kernel is 3 sqrt(3) / (8 sigma).
  field.lipschitz = std::abs(field.linear) + 3.0 * std::sqrt(3.0) / 8.0 / field.shape * weight_mass;
  return field;
}

// ---------------------------------------------------------------------------
// Flow integration

namespace {

struct FlowStats {
  double lipschitz = 0.0;
  double min_separation = std::numeric_limits<double>::infinity();
};

void rk4_stage(const VelocityField& field, const std::vector<Complex>& base,
               const std::vector<Complex>* slope, double h, std::vector<Complex>& out) {
  const std::size_t n = base.size();
  out.resize(n);
  if (slope == nullptr) {
    for (std::size_t i = 0; i < n; ++i) out[i] = field(base[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = field(base[i] + h * (*slope)[i]);
  }
}

std::vector<Complex> rk4_step(const VelocityField& f0, const VelocityField& fh,
                              const VelocityField& f1, const std::vector<Complex>& pts,
                              double h) {
  std::vector<Complex> k1, k2, k3, k4;
  rk4_stage(f0, pts, nullptr, 0.0, k1);
  rk4_stage(fh, pts, &k1, h / 2, k2);
  rk4_stage(fh, pts, &k2, h / 2, k3);
  rk4_stage(f1, pts, &k3, h, k4);
  std::vector<Complex> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    out[i] = pts[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

// Advance the batch from r_from to r_to with step-doubling RK4.
void flow_segment(const HolomorphicMotionSpec& normalized, double theta,
                  std::vector<Complex>& pts, double r_from, double r_to, double tol,
                  FlowStats* stats) {
  const double span = r_to - r_from;
  if (span <= 0.0) return;
  double r = r_from;
  double h = span / 16.0;
  const double h_min = 1e-6 * span;
  auto make_field = [&](double rr) {
    auto field = build_velocity_field(normalized, rr, theta);
    if (stats != nullptr) {
      stats->lipschitz = std::max(stats->lipschitz, field.lipschitz);
      double sep = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < field.sites.size(); ++i)
        for (std::size_t j = i + 1; j < field.sites.size(); ++j)
          sep = std::min(sep, std::abs(field.sites[i] - field.sites[j]));
      stats->min_separation = std::min(stats->min_separation, sep);
    }
    return field;
  };
  while (r < r_to - 1e-15) {
    h = std::min(h, r_to - r);
    const auto f0 = make_field(r);
    const auto fq = make_field(r + h / 4);
    const auto fh = make_field(r + h / 2);
    const auto f3q = make_field(r + 3 * h / 4);
    const auto f1 = make_field(r + h);

    auto coarse = rk4_step(f0, fh, f1, pts, h);
    auto mid = rk4_step(f0, fq, fh, pts, h / 2);
    auto fine = rk4_step(fh, f3q, f1, mid, h / 2);

    double err = 0.0;
    double magnitude = 1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      err = std::max(err, std::abs(fine[i] - coarse[i]) / 15.0);
      magnitude = std::max(magnitude, std::abs(fine[i]));
    }
    const double budget = tol * magnitude;
    if (err <= budget) {
      for (std::size_t i = 0; i < pts.size(); ++i)
        pts[i] = fine[i] + (fine[i] - coarse[i]) / 15.0;
      r += h;
      const double grow = err > 0.0 ? 0.9 * std::pow(budget / err, 0.25) : 2.0;
      h *= std::clamp(grow, 1.0, 2.0);
    } else {
      h *= std::clamp(0.9 * std::pow(budget / err, 0.25), 0.25, 0.9);
      if (h < h_min)
        fail(ErrorCode::IntegrationFailure,
             "flow step underflow at r = " + std::to_string(r));
    }
  }
}

}  // namespace

std::vector<Complex> integrate_motion(const HolomorphicMotionSpec& normalized, Complex w0,
                                      double theta, const std::vector<double>& radii) {
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (radii[k] < 0.0 || radii[k] > normalized.sample_radius + 1e-12)
      fail(ErrorCode::OutOfRange, "requested radius outside [0, sample_radius]");
    if (k > 0 && radii[k] < radii[k - 1])
      fail(ErrorCode::InvalidInput, "radii must be ascending");
  }
  std::vector<Complex> pts{w0};
  std::vector<Complex> out;
  out.reserve(radii.size());
  double r = 0.0;
  for (double target : radii) {
    flow_segment(normalized, theta, pts, r, target, 1e-11, nullptr);
    r = target;
    out.push_back(pts[0]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tabulated torus family fitted to the flowed circles

namespace {

// Fiber radii stored as truncated Fourier series in psi, on a grid of base
// angles (columns) by levels u = sqrt(t) (knots), with precomputed
// u-slopes; cubic Hermite in u, Catmull-Rom in the base angle (exact
// column hit for on-knot queries), trigonometric in psi.
struct RadiusTables {
  std::size_t columns = 0;     // base angles
  std::size_t modes = 0;       // psi modes kept
  std::vector<double> knots;   // u values, ascending
  std::vector<double> values;  // [column][knot][2*modes+1]
  std::vector<double> slopes;  // d(values)/du, same layout
  double u_round = 0.0;        // exact circles at or below this u
  double u_faithful = 0.0;     // fully flowed at or beyond this u
  double u_max = 0.0;          // table end
  double max_declared = 0.0;   // advertised max level (headroom below cap)

  std::size_t stride() const { return 2 * modes + 1; }
  const double* at(std::size_t column, std::size_t knot, bool slope) const {
    const auto& src = slope ? slopes : values;
    return src.data() + (column * knots.size() + knot) * stride();
  }
};

double trig_eval(const double* coeffs, std::size_t modes, double psi, bool derivative) {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  double ck = 1.0, sk = 0.0;
  double acc = derivative ? 0.0 : coeffs[0];
  for (std::size_t k = 1; k <= modes; ++k) {
    const double next_c = ck * c - sk * s;
    const double next_s = sk * c + ck * s;
    ck = next_c;
    sk = next_s;
    const double a = coeffs[k];
    const double b = coeffs[modes + k];
    if (derivative)
      acc += double(k) * (-a * sk + b * ck);
    else
      acc += a * ck + b * sk;
  }
  return acc;
}

class FlowedTorusFamily final : public TorusFamily {
 public:
  explicit FlowedTorusFamily(RadiusTables tables) : tb_(std::move(tables)) {}

  double radius(double x, double psi, double t) const override {
    return eval(x, psi, t, Want::value);
  }
  double radius_dt(double x, double psi, double t) const override {
    return eval(x, psi, t, Want::dt);
  }
  double radius_dpsi(double x, double psi, double t) const override {
    return eval(x, psi, t, Want::dpsi);
  }
  double collar_level() const override { return tb_.u_round * tb_.u_round; }
  double max_level() const override { return tb_.max_declared; }
  double level_cap() const override { return tb_.u_max * tb_.u_max; }

  // Exact Wirtinger derivatives by implicit differentiation of
  // radius(x, psi, t) = |w|: far cheaper than the finite-difference
  // default, which re-runs the level root-find eight times.
  Gradients gradients(Complex lambda, Complex w) const override {
    if (w == 0.0)
      fail(ErrorCode::ZeroSection, "gradients are undefined at w = 0");
    const double m2 = std::norm(w);
    if (m2 <= collar_level()) return {std::conj(w), Complex(0.0)};
    const double t = level(lambda, w);
    const double x = std::arg(lambda);
    const double psi = std::arg(w);
    const double m = std::abs(w);
    const double r_t = eval(x, psi, t, Want::dt) * 2.0 * std::sqrt(t);  // dR/du
    const double r_psi = eval(x, psi, t, Want::dpsi);
    const double r_x = eval(x, psi, t, Want::dx);
    // F solves R(x, psi, F) = m; with u = sqrt(F), dF/dm = 2u/R_u,
    // dF/dpsi = -2u R_psi / R_u, dF/dx = -2u R_x / R_u, and
    // m_w = e^{-i psi}/2, psi_w = -i e^{-i psi}/(2m), x_lambda = -i/(2 lambda).
    const double u = std::sqrt(t);
    const Complex unit = std::polar(1.0, -psi);
    const Complex f_w = unit * (u / r_t) * Complex(1.0, r_psi / m);
    const Complex f_lambda = Complex(0.0, 1.0) * (r_x * u / r_t) / lambda;
    if (std::abs(f_w) < 1e-8)
      fail(ErrorCode::DegenerateGradient,
           "|F_w| = " + std::to_string(std::abs(f_w)) + " below 1e-8");
    return {f_w, f_lambda};
  }

  void adopt_report(ValidationReport report) { report_ = std::move(report); }

 private:
  enum class Want { value, dt, dpsi, dx };

  // Flowed radius (or its u / psi derivative) from the tables.
  double table_eval(double x, double psi, double u, Want want) const {
    const auto& knots = tb_.knots;
    const double u_query = std::clamp(u, knots.front(), knots.back());
    std::size_t seg = std::upper_bound(knots.begin(), knots.end(), u_query) - knots.begin();
    seg = std::clamp<std::size_t>(seg, 1, knots.size() - 1) - 1;
    const double width = knots[seg + 1] - knots[seg];
    const double s = (u_query - knots[seg]) / width;

    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    const double g00 = 6.0 * s * (s - 1.0) / width;
    const double g10 = (1.0 - s) * (1.0 - 3.0 * s) / 1.0;
    const double g01 = -6.0 * s * (s - 1.0) / width;
    const double g11 = s * (3.0 * s - 2.0) / 1.0;

    const bool dpsi = want == Want::dpsi;
    auto column_value = [&](std::size_t column) {
      const double* c_lo = tb_.at(column, seg, false);
      const double* c_hi = tb_.at(column, seg + 1, false);
      const double* s_lo = tb_.at(column, seg, true);
      const double* s_hi = tb_.at(column, seg + 1, true);
      const double v_lo = trig_eval(c_lo, tb_.modes, psi, dpsi);
      const double v_hi = trig_eval(c_hi, tb_.modes, psi, dpsi);
      const double d_lo = trig_eval(s_lo, tb_.modes, psi, dpsi);
      const double d_hi = trig_eval(s_hi, tb_.modes, psi, dpsi);
      if (want == Want::dt)  // derivative with respect to u here
        return g00 * v_lo + g10 * d_lo + g01 * v_hi + g11 * d_hi;
      return h00 * v_lo + h10 * width * d_lo + h01 * v_hi + h11 * width * d_hi;
    };

    const double step = kTwoPi / double(tb_.columns);
    const double pos = wrap_angle(x) / step;
    const double nearest = std::round(pos);
    const std::size_t n = tb_.columns;
    if (std::abs(pos - nearest) < 1e-9) {
      const std::size_t k = std::size_t(nearest) % n;
      if (want != Want::dx) return column_value(k);
      // Catmull-Rom derivative at a knot is the centered difference.
      return (column_value((k + 1) % n) - column_value((k + n - 1) % n)) / (2.0 * step);
    }
    const std::size_t base = std::size_t(std::floor(pos));
    const double f = pos - double(base);
    double w0, w1, w2, w3;
    if (want == Want::dx) {
      w0 = 0.5 * (4.0 * f - 3.0 * f * f - 1.0) / step;
      w1 = 0.5 * (9.0 * f - 10.0) * f / step;
      w2 = 0.5 * (8.0 * f - 9.0 * f * f + 1.0) / step;
      w3 = 0.5 * (3.0 * f - 2.0) * f / step;
    } else {
      w0 = 0.5 * f * ((2.0 - f) * f - 1.0);
      w1 = 0.5 * (f * f * (3.0 * f - 5.0) + 2.0);
      w2 = 0.5 * f * ((4.0 - 3.0 * f) * f + 1.0);
      w3 = 0.5 * f * f * (f - 1.0);
    }
    const double v0 = column_value((base + n - 1) % n);
    const double v1 = column_value(base % n);
    const double v2 = column_value((base + 1) % n);
    const double v3 = column_value((base + 2) % n);
    return w0 * v0 + w1 * v1 + w2 * v2 + w3 * v3;
  }

  double eval(double x, double psi, double t, Want want) const {
    const double u = std::sqrt(t);
    if (u <= tb_.u_round) {
      if (want == Want::value) return u;
      if (want == Want::dt) return 0.5 / u;  // d sqrt(t) / dt
      return 0.0;
    }
    const double span = tb_.u_faithful - tb_.u_round;
    const double ramp_arg = (u - tb_.u_round) / span;
    const double eta = smooth_ramp(ramp_arg);
    switch (want) {
      case Want::value: {
        const double flow = table_eval(x, psi, u, Want::value);
        return (1.0 - eta) * u + eta * flow;
      }
      case Want::dt: {
        const double flow = table_eval(x, psi, u, Want::value);
        const double flow_du = table_eval(x, psi, u, Want::dt);
        const double eta_du = smooth_ramp_derivative(ramp_arg) / span;
        const double d_du = (1.0 - eta) + eta * flow_du + eta_du * (flow - u);
        return d_du * 0.5 / u;
      }
      case Want::dpsi:
        return eta * table_eval(x, psi, u, Want::dpsi);
      case Want::dx:
        return eta * table_eval(x, psi, u, Want::dx);
    }
    return 0.0;  // unreachable
  }

  RadiusTables tb_;
};

// Trigonometric upsampling of a closed curve given by samples.
std::vector<Complex> upsample_curve(const std::vector<Complex>& samples, std::size_t fine) {
  auto coeffs = fft::analyze(samples);
  const std::size_t n = samples.size();
  std::vector<Complex> padded(fine, Complex(0.0));
  for (std::size_t k = 0; k < n / 2; ++k) padded[k] = coeffs[k];
  for (std::size_t k = 1; k < n / 2; ++k) padded[fine - k] = coeffs[n - k];
  padded[n / 2] = 0.5 * coeffs[n / 2];
  padded[fine - n / 2] = 0.5 * coeffs[n / 2];
  return fft::synthesize(std::move(padded));
}

// Fit one pushed curve as a psi Fourier radius series; appends
// 1 + 2*modes coefficients to `out`.  Throws StarShapeViolation when the
// curve is not a radial graph about 0.
void fit_curve(const std::vector<Complex>& flowed, std::size_t modes, double base_angle,
               double level, std::vector<double>& out) {
  const std::size_t fine = 512;
  auto curve = upsample_curve(flowed, fine);

  auto reject = [&](const std::string& why) {
    fail(ErrorCode::StarShapeViolation,
         "pushed curve at base angle " + std::to_string(base_angle) + ", level " +
             std::to_string(level) + " " + why);
  };

  std::vector<double> phi(fine), rho(fine);
  for (std::size_t m = 0; m < fine; ++m) {
    rho[m] = std::abs(curve[m]);
    if (rho[m] < 1e-12) reject("passes through 0");
    phi[m] = std::arg(curve[m]);
  }
  // Unwrap, confirm a single positive loop, and demand a strictly
  // monotone angle (the radial-graph property).
  for (std::size_t m = 1; m < fine; ++m) {
    while (phi[m] <= phi[m - 1] - 0.5 * kTwoPi) phi[m] += kTwoPi;
    while (phi[m] > phi[m - 1] + 0.5 * kTwoPi) phi[m] -= kTwoPi;
  }
  const double closing = std::remainder(phi.front() - phi.back(), kTwoPi);
  const double winding = phi.back() - phi.front() + closing;
  if (std::abs(winding - kTwoPi) > 0.5) reject("does not wind once about 0");
  for (std::size_t m = 1; m < fine; ++m)
    if (phi[m] <= phi[m - 1]) reject("is not a radial graph");

  // Resample the radius at uniform angles by 4-point Lagrange interpolation
  // on the monotone angle sequence (periodically extended).
  const std::size_t uniform = 256;
  auto node = [&](std::ptrdiff_t idx) -> std::pair<double, double> {
    std::ptrdiff_t m = idx;
    double shift = 0.0;
    while (m < 0) {
      m += std::ptrdiff_t(fine);
      shift -= kTwoPi;
    }
    while (m >= std::ptrdiff_t(fine)) {
      m -= std::ptrdiff_t(fine);
      shift += kTwoPi;
    }
    return {phi[std::size_t(m)] + shift, rho[std::size_t(m)]};
  };
  std::vector<double> resampled(uniform);
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < uniform; ++i) {
    double target = kTwoPi * double(i) / double(uniform);
    while (target < phi.front()) target += kTwoPi;
    while (target >= phi.front() + kTwoPi) target -= kTwoPi;
    while (cursor + 1 < fine && phi[cursor + 1] <= target) ++cursor;
    if (phi[cursor] > target) cursor = 0;  // wrapped around
    while (cursor + 1 < fine && phi[cursor + 1] <= target) ++cursor;
    double value = 0.0;
    std::pair<double, double> nodes[4] = {node(std::ptrdiff_t(cursor) - 1), node(cursor),
                                          node(cursor + 1), node(cursor + 2)};
    for (int a = 0; a < 4; ++a) {
      double weight = 1.0;
      for (int b = 0; b < 4; ++b)
        if (b != a) weight *= (target - nodes[b].first) / (nodes[a].first - nodes[b].first);
      value += weight * nodes[a].second;
    }
    resampled[i] = value;
  }

  std::vector<Complex> as_complex(resampled.begin(), resampled.end());
  auto spectrum = fft::analyze(std::move(as_complex));
  out.push_back(spectrum[0].real());
  for (std::size_t k = 1; k <= modes; ++k) out.push_back(2.0 * spectrum[k].real());
  for (std::size_t k = 1; k <= modes; ++k) out.push_back(-2.0 * spectrum[k].imag());
}

// Parabolic (three-point) slopes through the per-mode coefficients.
std::vector<double> knot_slopes(const std::vector<double>& knots,
                                const std::vector<double>& values, std::size_t stride) {
  const std::size_t nu = knots.size();
  std::vector<double> slopes(values.size(), 0.0);
  for (std::size_t c = 0; c < stride; ++c) {
    auto value = [&](std::size_t j) { return values[j * stride + c]; };
    for (std::size_t j = 0; j < nu; ++j) {
      double slope;
      if (j == 0) {
        slope = (value(1) - value(0)) / (knots[1] - knots[0]);
      } else if (j + 1 == nu) {
        slope = (value(nu - 1) - value(nu - 2)) / (knots[nu - 1] - knots[nu - 2]);
      } else {
        const double dl = knots[j] - knots[j - 1];
        const double dr = knots[j + 1] - knots[j];
        const double sl = (value(j) - value(j - 1)) / dl;
        const double sr = (value(j + 1) - value(j)) / dr;
        slope = (dr * sl + dl * sr) / (dl + dr);
      }
      slopes[j * stride + c] = slope;
    }
  }
  return slopes;
}

HolomorphicMotionSpec premap_spec(const HolomorphicMotionSpec& normalized, Complex factor) {
  HolomorphicMotionSpec out;
  out.sample_radius = normalized.sample_radius;
  out.points.reserve(normalized.points.size());
  for (const auto& p : normalized.points) out.points.push_back(factor * p);
  out.trajectories.reserve(normalized.trajectories.size());
  for (const auto& series : normalized.trajectories) {
    std::vector<Complex> scaled(series.size());
    for (std::size_t k = 0; k < series.size(); ++k) scaled[k] = factor * series[k];
    out.trajectories.push_back(std::move(scaled));
  }
  return out;
}

}  // namespace

Complex MotionTori::to_solver(Complex w) const { return std::polar(scale, rotation) * w; }
Complex MotionTori::to_normalized(Complex q) const { return q / std::polar(scale, rotation); }

MotionTori build_motion_tori(const HolomorphicMotionSpec& normalized,
                             const MotionToriConfig& config) {
  if (normalized.points.empty())
    fail(ErrorCode::InvalidInput, "motion needs at least one point");
  if (normalized.points.size() != normalized.trajectories.size())
    fail(ErrorCode::InvalidInput, "every point needs exactly one trajectory");
  if (config.flow_samples < 16 || !fft::is_power_of_two(config.flow_samples))
    fail(ErrorCode::InvalidGrid, "flow_samples must be a power of two, at least 16");
  if (config.base_knots < 16)
    fail(ErrorCode::InvalidGrid, "base_knots must be at least 16");

  // Generic rotation-and-scale pre-map: the largest working modulus lands
  // at 0.9, a fixed irrational rotation avoids grid-aligned coincidences.
  double max_mod = config.extra_radius;
  for (const auto& p : normalized.points) max_mod = std::max(max_mod, std::abs(p));
  if (max_mod < 1e-9)
    fail(ErrorCode::InvalidInput, "motion has no nonzero modulus to span a torus band");
  MotionTori tori;
  tori.scale = 0.9 / max_mod;
  tori.rotation = 0.61803398874989485;
  const Complex premap = std::polar(tori.scale, tori.rotation);
  const auto spec = premap_spec(normalized, premap);

  // Distinct circles for distinct points.
  std::vector<double> data_moduli;
  for (const auto& q : spec.points) {
    const double mod = std::abs(q);
    tori.data_levels.push_back(mod * mod);
    if (mod > 1e-12) data_moduli.push_back(mod);
  }
  {
    auto sorted = data_moduli;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 1; k < sorted.size(); ++k)
      if (sorted[k] - sorted[k - 1] < 1e-6)
        fail(ErrorCode::ModuliCollision,
             "two points share the fiber modulus " + std::to_string(sorted[k]) +
                 " within 1e-6; no circle foliation separates them");
  }

  const double extra = config.extra_radius > 0.0 ? tori.scale * config.extra_radius : 0.0;
  double band_lo = extra > 0.0 ? extra : std::numeric_limits<double>::infinity();
  double band_hi = std::max(extra, 0.0);
  for (double mod : data_moduli) {
    band_lo = std::min(band_lo, mod);
    band_hi = std::max(band_hi, mod);
  }
  if (!std::isfinite(band_lo))
    fail(ErrorCode::InvalidInput, "motion has no nonzero modulus to span a torus band");

  RadiusTables tables;
  tables.columns = config.base_knots;
  tables.modes = config.psi_modes;
  tables.u_round = 0.3 * band_lo;
  tables.u_faithful = 0.75 * band_lo;
  tables.u_max = 1.15 * band_hi;
  tables.max_declared = (1.09 * band_hi) * (1.09 * band_hi);

  // Level knots: a uniform ladder plus the exact data circles.
  std::vector<double> knots;
  knots.push_back(tables.u_round);
  for (double mod : data_moduli) knots.push_back(mod);
  if (extra > 0.0) knots.push_back(extra);
  knots.push_back(tables.u_max);
  const std::size_t ladder = std::max<std::size_t>(config.level_knots, 8);
  for (std::size_t j = 1; j + 1 < ladder; ++j) {
    const double u = tables.u_round + (tables.u_max - tables.u_round) * double(j) / double(ladder - 1);
    bool close = false;
    for (double existing : knots) close = close || std::abs(existing - u) < 1e-4;
    if (!close) knots.push_back(u);
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              knots.end());
  tables.knots = knots;

  const std::size_t nu = knots.size();
  const std::size_t nf = config.flow_samples;
  tables.values.reserve(tables.columns * nu * tables.stride());

  FlowStats stats;
  std::vector<Complex> batch(nu * nf);
  for (std::size_t column = 0; column < tables.columns; ++column) {
    const double theta = kTwoPi * double(column) / double(tables.columns);
    for (std::size_t j = 0; j < nu; ++j)
      for (std::size_t l = 0; l < nf; ++l)
        batch[j * nf + l] = std::polar(knots[j], kTwoPi * double(l) / double(nf));
    flow_segment(spec, theta, batch, 0.0, spec.sample_radius, config.rk_tol, &stats);
    std::vector<Complex> curve(nf);
    for (std::size_t j = 0; j < nu; ++j) {
      std::copy_n(batch.begin() + std::ptrdiff_t(j * nf), nf, curve.begin());
      fit_curve(curve, tables.modes, theta, knots[j] * knots[j], tables.values);
    }
  }
  // Regroup from [column][knot] appended order into slope tables.
  tables.slopes.resize(tables.values.size());
  for (std::size_t column = 0; column < tables.columns; ++column) {
    const std::size_t offset = column * nu * tables.stride();
    std::vector<double> block(tables.values.begin() + std::ptrdiff_t(offset),
                              tables.values.begin() + std::ptrdiff_t(offset + nu * tables.stride()));
    auto slopes = knot_slopes(tables.knots, block, tables.stride());
    std::copy(slopes.begin(), slopes.end(), tables.slopes.begin() + std::ptrdiff_t(offset));
  }

  tori.lipschitz = stats.lipschitz;
  tori.min_separation = stats.min_separation;

  auto family = std::make_shared<FlowedTorusFamily>(std::move(tables));
  auto report = validate_family(*family, ValidationGrid{});
  if (!report.passed)
    fail(ErrorCode::FamilyValidationFailed,
         "flowed torus family failed validation: " + report.failure);
  family->adopt_report(std::move(report));
  tori.family = std::move(family);
  return tori;
}

// ---------------------------------------------------------------------------
// The one-point extension

Complex MotionExtension::evaluate(Complex lambda) const {
  if (std::abs(lambda) > sample_radius + 1e-12)
    fail(ErrorCode::OutOfRange, "extension is only defined for |lambda| <= sample_radius");
  return holomorphic_extension(trajectory, lambda / sample_radius, 1e-6);
}

std::string MotionExtension::to_json() const {
  nlohmann::json j;
  j["sample_radius"] = sample_radius;
  j["trajectory"] = nlohmann::json::parse(trajectory.to_json());
  auto& fitted = j["series"] = nlohmann::json::array();
  for (const auto& c : series) fitted.push_back(dump_complex(c));
  j["base_value"] = dump_complex(base_value);
  j["base_identity_error"] = base_identity_error;
  j["coincidence_errors"] = coincidence_errors;
  j["holo_residual"] = holo_residual;
  j["min_separation"] = min_separation;
  j["leaf_level"] = leaf_level;
  j["leaf_anchor"] = leaf_anchor;
  return j.dump();
}

MotionExtension extend_motion(const HolomorphicMotionSpec& spec, Complex a_new,
                              const MotionExtensionConfig& config) {
  validate_motion(spec);
  for (std::size_t i = 0; i < spec.points.size(); ++i)
    if (std::abs(a_new - spec.points[i]) < 1e-9)
      fail(ErrorCode::PointsCollide,
           "the new point coincides with data point " + std::to_string(i));

  auto [normalized, frame] = normalize_motion(spec);

  MotionToriConfig tori_config = config.tori;
  tori_config.extra_radius = std::abs(a_new - frame.pivot);
  // Keep boundary samples on table columns: columns must be a multiple of
  // the solver grid.
  const std::size_t grid = config.foliation.grid;
  if (tori_config.base_knots % grid != 0)
    tori_config.base_knots = grid * std::max<std::size_t>(1, tori_config.base_knots / grid + 1);

  auto tori = build_motion_tori(normalized, tori_config);
  const Complex w0 = tori.to_solver(a_new - frame.pivot);
  const double r0 = spec.sample_radius;

  auto pull_back = [&](const BoundaryFunction& boundary) {
    std::vector<Complex> samples(boundary.size());
    for (std::size_t j = 0; j < boundary.size(); ++j) {
      const Complex lambda = std::polar(r0, boundary.theta(j));
      samples[j] = frame.to_user(lambda, tori.to_normalized(boundary.sample(j)));
    }
    return BoundaryFunction::from_samples(std::move(samples));
  };

  auto located = leaf_through_point(tori.family, w0, config.foliation);

  MotionExtension out{pull_back(located.leaf.boundary)};
  out.sample_radius = r0;
  out.leaf_level = located.t;
  out.leaf_anchor = located.xi;
  out.holo_residual = holomorphy_residual(out.trajectory);
  out.base_value = out.trajectory.mean();
  out.base_identity_error = std::abs(out.base_value - a_new);

  // Uniqueness echo: the leaf through each data point must reproduce the
  // given trajectory.
  out.coincidence_errors.assign(spec.points.size(), 0.0);
  for (std::size_t i = 0; i < spec.points.size(); ++i) {
    const Complex q = tori.to_solver(normalized.points[i]);
    if (std::abs(q) < 1e-12) continue;  // the pinned point maps back exactly
    auto data_leaf = leaf_through_point(tori.family, q, config.foliation);
    auto echoed = pull_back(data_leaf.leaf.boundary);
    double sup = 0.0;
    for (std::size_t j = 0; j < echoed.size(); ++j) {
      const Complex lambda = std::polar(r0, echoed.theta(j));
      sup = std::max(sup, std::abs(echoed.sample(j) - spec.value(i, lambda)));
    }
    out.coincidence_errors[i] = sup;
  }
  double worst = 0.0;
  for (double e : out.coincidence_errors) worst = std::max(worst, e);
  if (worst > config.coincidence_tol) {
    std::string detail;
    for (std::size_t i = 0; i < out.coincidence_errors.size(); ++i)
      detail += (i ? ", " : "") + std::to_string(out.coincidence_errors[i]);
    fail(ErrorCode::CoincidenceCheckFailed,
         "data leaves fail to reproduce their trajectories (per-point sup: " + detail + ")");
  }

  double separation = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < out.trajectory.size(); ++j) {
    const Complex lambda = std::polar(r0, out.trajectory.theta(j));
    for (std::size_t i = 0; i < spec.points.size(); ++i)
      separation = std::min(separation, std::abs(out.trajectory.sample(j) - spec.value(i, lambda)));
  }
  out.min_separation = separation;

  // Fitted power series in lambda: the boundary Fourier modes of the
  // trajectory are the Taylor coefficients in lambda / r0.
  for (std::size_t k = 1; k <= 24; ++k)
    out.series.push_back(out.trajectory.coefficient(int(k)) / std::pow(r0, double(k)));
  while (!out.series.empty() && std::abs(out.series.back()) < 1e-12) out.series.pop_back();

  return out;
}

std::string MotionSweep::to_json() const {
  nlohmann::json j;
  j["radii"] = radii;
  j["max_disagreement"] = max_disagreement;
  auto& exts = j["extensions"] = nlohmann::json::array();
  for (const auto& e : extensions) exts.push_back(nlohmann::json::parse(e.to_json()));
  return j.dump();
}

MotionSweep extend_motion_sweep(const HolomorphicMotionSpec& spec, Complex a_new,
                                const std::vector<double>& radii,
                                const MotionExtensionConfig& config) {
  if (radii.empty()) fail(ErrorCode::InvalidInput, "sweep needs at least one radius");
  MotionSweep sweep;
  sweep.radii = radii;
  double smallest = 1.0;
  for (double r : radii) {
    if (!(r > 0.0) || r >= 1.0) fail(ErrorCode::OutOfRange, "sweep radii must lie in (0, 1)");
    smallest = std::min(smallest, r);
    HolomorphicMotionSpec resized = spec;
    resized.sample_radius = r;
    sweep.extensions.push_back(extend_motion(resized, a_new, config));
  }
  const double probe = 0.7 * smallest;
  for (std::size_t a = 0; a < sweep.extensions.size(); ++a)
    for (std::size_t b = a + 1; b < sweep.extensions.size(); ++b)
      for (int k = 0; k < 64; ++k) {
        const Complex lambda = std::polar(probe, kTwoPi * k / 64.0);
        sweep.max_disagreement =
            std::max(sweep.max_disagreement, std::abs(sweep.extensions[a].evaluate(lambda) -
                                                      sweep.extensions[b].evaluate(lambda)));
      }
  return sweep;
}

}  // namespace torusfill
