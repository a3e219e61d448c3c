#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "torusfill/errors.hpp"
#include "torusfill/motion.hpp"

using namespace torusfill;

namespace {

// Coarser grids than the defaults so the suite stays quick; the full-size
// pipeline is exercised by the acceptance run.
MotionExtensionConfig quick_config() {
  MotionExtensionConfig config;
  config.tori.base_knots = 64;
  config.tori.flow_samples = 32;
  config.tori.level_knots = 16;
  config.tori.psi_modes = 16;
  config.foliation.grid = 64;
  config.foliation.probe_leaves = 8;
  config.foliation.solver.t_step = 0.04;
  return config;
}

// a -> a (1 + slope lambda), already pinned at 0.
HolomorphicMotionSpec dilation_motion(Complex p, double slope) {
  HolomorphicMotionSpec spec;
  spec.points = {Complex(0.0), p};
  spec.trajectories = {{}, {slope * p}};
  return spec;
}

ErrorCode thrown_code(const std::function<void()>& body) {
  try {
    body();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode(-1);
}

}  // namespace

TEST_CASE("a motion that never moves extends to the constant trajectory") {
  HolomorphicMotionSpec spec;
  spec.points = {Complex(1.0, 0.0), Complex(0.0, 2.0)};
  spec.trajectories = {{}, {}};

  auto ext = extend_motion(spec, Complex(-1.0, 0.0), quick_config());
  double sup = 0.0;
  for (std::size_t j = 0; j < ext.trajectory.size(); ++j)
    sup = std::max(sup, std::abs(ext.trajectory.sample(j) - Complex(-1.0, 0.0)));
  CHECK(sup < 1e-8);
  CHECK(ext.base_identity_error < 1e-8);
  CHECK(ext.holo_residual < 1e-10);
  CHECK(ext.series.empty());
}

TEST_CASE("a global dilation pushes circles to scaled circles") {
  auto spec = dilation_motion(Complex(2.0, 0.0), 0.1);
  MotionToriConfig tc = quick_config().tori;
  auto tori = build_motion_tori(spec, tc);

  CHECK(tori.data_levels.size() == 2);
  CHECK(tori.data_levels[0] == doctest::Approx(0.0));
  CHECK(tori.data_levels[1] == doctest::Approx(0.81).epsilon(1e-12));

  const auto& family = *tori.family;
  // Collar fibers are exact circles.
  CHECK(family.radius(0.3, 1.1, 0.04) == doctest::Approx(0.2).epsilon(1e-14));

  // In the faithful band the image of |w| = u over e^{ix} is the circle of
  // radius u |1 + 0.1 r0 e^{ix}|, independent of psi.
  const double u = 0.8;
  for (double x : {kTwoPi * 5.0 / 64.0, kTwoPi * 40.0 / 64.0}) {
    const double expected = u * std::abs(1.0 + 0.09 * std::polar(1.0, x));
    CHECK(std::abs(family.radius(x, 0.7, u * u) - expected) < 1e-7);
    CHECK(std::abs(family.radius(x, 2.9, u * u) - expected) < 1e-7);
  }
  const double x_off = 0.1234;
  const double expected_off = u * std::abs(1.0 + 0.09 * std::polar(1.0, x_off));
  CHECK(std::abs(family.radius(x_off, 0.7, u * u) - expected_off) < 5e-6);
}

TEST_CASE("the velocity field reduces to its linear tail for one moving point") {
  auto spec = dilation_motion(Complex(1.5, 0.5), 0.2);
  auto field = build_velocity_field(spec, 0.4, 0.9);

  // The vanishing-moment condition zeroes every kernel weight here, so the
  // field is exactly v(p)/p * w.
  const Complex p = spec.value(1, std::polar(0.4, 0.9));
  const Complex v = spec.radial_velocity(1, 0.4, 0.9);
  for (const auto& alpha : field.weights) CHECK(std::abs(alpha) < 1e-12);
  CHECK(std::abs(field.linear - v / p) < 1e-12);

  const Complex mid = 0.5 * p;
  CHECK(std::abs(field(mid) - v / p * mid) < 1e-12);
  CHECK(std::abs(field(Complex(0.0))) == 0.0);
}

TEST_CASE("data sites ride their own trajectories through the flow") {
  HolomorphicMotionSpec spec;
  spec.points = {Complex(0.0), Complex(1.1, 0.3)};
  spec.trajectories = {{}, {Complex(0.2, 0.0), Complex(0.0, -0.15)}};

  const double theta = 0.7;
  auto path = integrate_motion(spec, spec.points[1], theta, {0.45, 0.9});
  CHECK(std::abs(path[0] - spec.value(1, std::polar(0.45, theta))) < 1e-8);
  CHECK(std::abs(path[1] - spec.value(1, std::polar(0.9, theta))) < 1e-8);

  // The pinned point stays put.
  auto still = integrate_motion(spec, Complex(0.0), 2.2, {0.9});
  CHECK(std::abs(still[0]) == 0.0);
}

TEST_CASE("a single-point motion extends by following the pivot") {
  HolomorphicMotionSpec spec;
  spec.points = {Complex(3.0, 0.0)};
  spec.trajectories = {{Complex(0.5, 0.0)}};

  const Complex a_new(1.0, 0.5);
  auto ext = extend_motion(spec, a_new, quick_config());
  double sup = 0.0;
  for (std::size_t j = 0; j < ext.trajectory.size(); ++j) {
    const Complex lambda = std::polar(ext.sample_radius, ext.trajectory.theta(j));
    sup = std::max(sup, std::abs(ext.trajectory.sample(j) - (a_new + 0.5 * lambda)));
  }
  CHECK(sup < 1e-8);
  CHECK(ext.coincidence_errors.size() == 1);
  CHECK(ext.coincidence_errors[0] == 0.0);
  CHECK(ext.min_separation > 1.0);
}

TEST_CASE("normalization pins the first trajectory at zero") {
  HolomorphicMotionSpec spec;
  spec.points = {Complex(1.0, 1.0), Complex(-2.0, 0.5)};
  spec.trajectories = {{Complex(0.3, 0.0), Complex(0.0, 0.1)}, {Complex(0.0, -0.2)}};

  auto [norm, frame] = normalize_motion(spec);
  CHECK(std::abs(norm.points[0]) == 0.0);
  CHECK(norm.trajectories[0].empty());
  CHECK(norm.points[1] == spec.points[1] - spec.points[0]);
  REQUIRE(norm.trajectories[1].size() == 2);
  CHECK(std::abs(norm.trajectories[1][0] - Complex(-0.3, -0.2)) < 1e-15);
  CHECK(std::abs(norm.trajectories[1][1] - Complex(0.0, -0.1)) < 1e-15);

  for (double angle : {0.0, 1.3, 4.4}) {
    const Complex lambda = std::polar(0.6, angle);
    CHECK(std::abs(frame.pivot_value(lambda) - spec.value(0, lambda)) < 1e-15);
    // Round trip of the coordinate change.
    const Complex w(0.4, -1.2);
    CHECK(std::abs(frame.to_user(lambda, frame.to_normalized(lambda, w)) - w) < 1e-15);
    // The normalized motion is the difference of trajectories.
    CHECK(std::abs(norm.value(1, lambda) - (spec.value(1, lambda) - spec.value(0, lambda))) <
          1e-15);
  }
}

TEST_CASE("extending a uniform dilation recovers its closed form") {
  HolomorphicMotionSpec spec;
  spec.points = {Complex(0.5, 0.0), Complex(0.0, 1.5)};
  spec.trajectories = {{Complex(0.1, 0.0)}, {Complex(0.0, 0.3)}};  // a (1 + 0.2 lambda)

  const Complex a_new(1.0, 0.0);
  auto ext = extend_motion(spec, a_new, quick_config());

  double sup = 0.0;
  for (std::size_t j = 0; j < ext.trajectory.size(); ++j) {
    const Complex lambda = std::polar(ext.sample_radius, ext.trajectory.theta(j));
    sup = std::max(sup, std::abs(ext.trajectory.sample(j) - (1.0 + 0.2 * lambda)));
  }
  CHECK(sup < 1e-6);
  CHECK(ext.base_identity_error < 1e-7);
  CHECK(ext.holo_residual < 1e-8);
  for (double e : ext.coincidence_errors) CHECK(e < 1e-6);
  REQUIRE(!ext.series.empty());
  CHECK(std::abs(ext.series[0] - Complex(0.2, 0.0)) < 1e-6);
  for (std::size_t k = 1; k < ext.series.size(); ++k) CHECK(std::abs(ext.series[k]) < 1e-6);
  CHECK(ext.min_separation > 0.1);

  // Interior evaluation through the fitted series.
  const Complex inside = ext.evaluate(Complex(0.3, 0.2));
  CHECK(std::abs(inside - (1.0 + 0.2 * Complex(0.3, 0.2))) < 1e-6);
  CHECK(thrown_code([&] { (void)ext.evaluate(Complex(1.2, 0.0)); }) == ErrorCode::OutOfRange);
}

TEST_CASE("extensions at different sample radii agree on the common disk") {
  auto spec = dilation_motion(Complex(1.2, 0.4), 0.15);
  auto sweep = extend_motion_sweep(spec, Complex(-0.8, 0.3), {0.45, 0.9}, quick_config());
  CHECK(sweep.extensions.size() == 2);
  CHECK(sweep.max_disagreement < 1e-6);
}

TEST_CASE("re-extending an extended motion changes nothing for dilations") {
  HolomorphicMotionSpec spec;
  spec.points = {Complex(0.5, 0.0), Complex(0.0, 1.5)};
  spec.trajectories = {{Complex(0.1, 0.0)}, {Complex(0.0, 0.3)}};

  const Complex first(1.0, 0.0);
  auto ext = extend_motion(spec, first, quick_config());

  HolomorphicMotionSpec augmented = spec;
  augmented.points.push_back(first);
  augmented.trajectories.push_back(ext.series);

  const Complex second(-0.4, -0.4);
  auto direct = extend_motion(spec, second, quick_config());
  auto chained = extend_motion(augmented, second, quick_config());
  double sup = 0.0;
  for (std::size_t j = 0; j < direct.trajectory.size(); ++j)
    sup = std::max(sup, std::abs(direct.trajectory.sample(j) - chained.trajectory.sample(j)));
  CHECK(sup < 1e-6);
}

TEST_CASE("colliding data is rejected") {
  HolomorphicMotionSpec twin;
  twin.points = {Complex(0.2, 0.0), Complex(0.2, 0.0)};
  twin.trajectories = {{}, {}};
  CHECK(thrown_code([&] { validate_motion(twin); }) == ErrorCode::PointsCollide);

  // Opposing shear strong enough to drive two trajectories through each
  // other inside the sampled disk.
  HolomorphicMotionSpec crossing;
  crossing.points = {Complex(0.0), Complex(0.8, 0.0), Complex(0.0, 0.45)};
  crossing.trajectories = {{}, {Complex(0.0, 2.0)}, {Complex(0.0, -2.0)}};
  CHECK(thrown_code([&] { validate_motion(crossing); }) == ErrorCode::PointsCollide);

  auto spec = dilation_motion(Complex(1.0, 1.0), 0.1);
  CHECK(thrown_code([&] { extend_motion(spec, Complex(1.0, 1.0), quick_config()); }) ==
        ErrorCode::PointsCollide);
}

TEST_CASE("points sharing a fiber circle are rejected") {
  HolomorphicMotionSpec spec;
  spec.points = {Complex(0.0), Complex(1.0, 0.0), Complex(0.0, 1.0)};
  spec.trajectories = {{}, {}, {}};
  CHECK(thrown_code([&] { build_motion_tori(spec, quick_config().tori); }) ==
        ErrorCode::ModuliCollision);
}

TEST_CASE("a folding shear is rejected as non-star-shaped") {
  HolomorphicMotionSpec spec;
  spec.points = {Complex(0.0), Complex(0.8, 0.0), Complex(0.0, 0.45)};
  spec.trajectories = {{}, {Complex(0.0, 1.2)}, {Complex(0.0, -1.2)}};
  try {
    build_motion_tori(spec, quick_config().tori);
    FAIL("folding motion was accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StarShapeViolation);
    CHECK(std::string(e.what()).find("level") != std::string::npos);
  }
}

TEST_CASE("malformed motions are rejected") {
  HolomorphicMotionSpec spec = dilation_motion(Complex(1.0, 0.0), 0.1);
  spec.sample_radius = 1.0;
  CHECK(thrown_code([&] { validate_motion(spec); }) == ErrorCode::OutOfRange);
  spec.sample_radius = -0.5;
  CHECK(thrown_code([&] { validate_motion(spec); }) == ErrorCode::OutOfRange);

  HolomorphicMotionSpec lopsided;
  lopsided.points = {Complex(1.0, 0.0)};
  lopsided.trajectories = {};
  CHECK(thrown_code([&] { validate_motion(lopsided); }) == ErrorCode::InvalidInput);

  HolomorphicMotionSpec empty;
  CHECK(thrown_code([&] { validate_motion(empty); }) == ErrorCode::InvalidInput);

  // A lone pinned point spans no torus band unless a target radius is given.
  HolomorphicMotionSpec pin_only;
  pin_only.points = {Complex(0.0)};
  pin_only.trajectories = {{}};
  MotionToriConfig tc = quick_config().tori;
  tc.extra_radius = 0.0;
  CHECK(thrown_code([&] { build_motion_tori(pin_only, tc); }) == ErrorCode::InvalidInput);
}

TEST_CASE("motions and extensions serialize") {
  HolomorphicMotionSpec spec;
  spec.points = {Complex(0.5, 0.0), Complex(0.0, 1.5)};
  spec.trajectories = {{Complex(0.1, 0.0)}, {Complex(0.0, 0.3), Complex(0.05, -0.02)}};
  spec.sample_radius = 0.8;

  auto round = HolomorphicMotionSpec::from_json(spec.to_json());
  REQUIRE(round.points.size() == 2);
  CHECK(round.sample_radius == 0.8);
  CHECK(round.points[1] == spec.points[1]);
  REQUIRE(round.trajectories[1].size() == 2);
  CHECK(round.trajectories[1][1] == spec.trajectories[1][1]);

  CHECK(thrown_code([] { HolomorphicMotionSpec::from_json("{ nope"); }) ==
        ErrorCode::InvalidInput);
  CHECK(thrown_code([] { HolomorphicMotionSpec::from_json("{\"points\": []}"); }) ==
        ErrorCode::InvalidInput);

  auto ext = extend_motion(dilation_motion(Complex(2.0, 0.0), 0.1), Complex(-1.0, 0.5),
                           quick_config());
  auto j = nlohmann::json::parse(ext.to_json());
  CHECK(j["sample_radius"].get<double>() == 0.9);
  CHECK(j["base_identity_error"].get<double>() < 1e-7);
  CHECK(j["coincidence_errors"].is_array());
  CHECK(j["trajectory"]["n"].get<int>() == 64);
}

TEST_CASE("exact gradients match the finite-difference fallback") {
  auto spec = dilation_motion(Complex(2.0, 0.0), 0.1);
  auto tori = build_motion_tori(spec, quick_config().tori);
  const auto& family = *tori.family;

  for (const Complex w : {Complex(0.5, 0.2), Complex(-0.3, 0.6), Complex(0.05, -0.12)}) {
    const Complex lambda = std::polar(1.0, 1.7);
    const auto exact = family.gradients(lambda, w);
    const auto fd = family.TorusFamily::gradients(lambda, w);
    CHECK(std::abs(exact.f_w - fd.f_w) < 1e-6 * (1.0 + std::abs(fd.f_w)));
    CHECK(std::abs(exact.f_lambda - fd.f_lambda) < 1e-6 * (1.0 + std::abs(fd.f_lambda)));
  }
}
