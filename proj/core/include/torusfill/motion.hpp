#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "torusfill/boundary_function.hpp"
#include "torusfill/foliation.hpp"
#include "torusfill/torus_family.hpp"

namespace torusfill {

// A finite holomorphic motion: distinct points a_i moved by truncated power
// series f(lambda, a_i) = a_i + sum_{k>=1} c_{i,k} lambda^k, injective in i
// for every |lambda| <= sample_radius.  The constant term is the point
// itself, so f(0, a_i) = a_i holds structurally.
struct HolomorphicMotionSpec {
  std::vector<Complex> points;
  std::vector<std::vector<Complex>> trajectories;  // c_{i,k}, k >= 1
  double sample_radius = 0.9;

  // a_i + sum_k c_{i,k} lambda^k.
  Complex value(std::size_t i, Complex lambda) const;
  // d/dr f(r e^{i theta}, a_i) along the ray of angle theta.
  Complex radial_velocity(std::size_t i, double r, double theta) const;

  std::string to_json() const;
  static HolomorphicMotionSpec from_json(const std::string& text);
};

// Structural checks plus the injectivity sweep over a polar grid of the
// |lambda| <= sample_radius disk.  Errors: InvalidInput (shape mismatch,
// no points), OutOfRange (sample_radius outside (0,1)), PointsCollide
// (coincident points, or trajectories crossing at a sampled lambda).
void validate_motion(const HolomorphicMotionSpec& spec);

// The affine change of w-coordinates that pins the first point at 0: the
// normalized motion is f(lambda, a) - f(lambda, a_1), and results map back
// through w -> w + f(lambda, a_1).
struct MotionNormalization {
  Complex pivot;                      // a_1
  std::vector<Complex> pivot_series;  // c_{1,k}, k >= 1

  Complex pivot_value(Complex lambda) const;  // f(lambda, a_1)
  Complex to_user(Complex lambda, Complex w) const { return w + pivot_value(lambda); }
  Complex to_normalized(Complex lambda, Complex w) const { return w - pivot_value(lambda); }
};

// Subtract the first trajectory from every trajectory and shift the points
// so a_1 = 0, f(lambda, 0) = 0.
std::pair<HolomorphicMotionSpec, MotionNormalization> normalize_motion(
    const HolomorphicMotionSpec& spec);

// Velocity field on C at base point r e^{i theta}: an inverse-quadratic
// radial-basis interpolant of the instantaneous trajectory velocities at
// the current point positions, with a complex-linear tail (so global
// rotations/scalings are reproduced exactly), a vanishing-moment side
// condition, and a multiplicative far-field taper.  v(0) = 0 because the
// pinned point 0 is always a data site.
struct VelocityField {
  std::vector<Complex> sites;    // current positions f(r e^{i theta}, a_i)
  std::vector<Complex> weights;  // kernel weights, sum_j weights_j conj(sites_j) = 0
  Complex linear;                // tail coefficient: v ~ linear * w near the sites
  double shape = 1.0;            // kernel width sigma (half the min site spacing)
  double taper_radius = 1.0;     // taper is inert inside this radius
  double lipschitz = 0.0;        // recorded bound on the working disk

  Complex operator()(Complex w) const;
};

// Build the field for the normalized motion at ray position (r, theta).
// Errors: PointsCollide when two current positions are closer than 1e-9.
VelocityField build_velocity_field(const HolomorphicMotionSpec& normalized, double r,
                                   double theta);

// Flow w0 along dw/dr = v_theta(r, w) and report the positions at the
// requested radii (ascending, within [0, sample_radius]).  Fourth-order
// Runge-Kutta with step doubling; data sites reproduce their own series to
// integration tolerance.  Errors: IntegrationFailure (step underflow).
std::vector<Complex> integrate_motion(const HolomorphicMotionSpec& normalized, Complex w0,
                                      double theta, const std::vector<double>& radii);

struct MotionToriConfig {
  std::size_t base_knots = 256;   // radius columns over the base circle; a
                                  // multiple of the disk-solver grid keeps
                                  // boundary queries on-knot
  std::size_t flow_samples = 64;  // integrated points per initial circle
  std::size_t level_knots = 40;   // level knots before data insertion
  std::size_t psi_modes = 48;     // stored fiber-radius Fourier modes
  double extra_radius = 0.0;      // extend the level band to cover this modulus
  double rk_tol = 1e-11;          // per-step integration error target
};

// The torus family swept out by flowing nested circles through the motion,
// tabulated over the base circle and rescaled so |lambda| = sample_radius
// becomes the unit circle.  Fiber coordinates carry a generic
// rotation-and-scale pre-map q = scale e^{i rotation} w recorded here.
struct MotionTori {
  std::shared_ptr<const TorusFamily> family;
  double scale = 1.0;
  double rotation = 0.0;
  std::vector<double> data_levels;  // level of each (normalized) point; 0 for the pin
  double lipschitz = 0.0;           // largest recorded field constant
  double min_separation = 1.0;      // smallest pairwise site distance seen

  Complex to_solver(Complex w) const;  // apply the pre-map
  Complex to_normalized(Complex q) const;
};

// Flow the initial foliation by circles through the motion and fit the
// images as a star-shaped torus family (per-(lambda, t) radial resampling).
// Errors: ModuliCollision (two points share a circle within 1e-6),
// StarShapeViolation (a pushed curve is not a radial graph; message names
// the base angle and level), FamilyValidationFailed, IntegrationFailure.
MotionTori build_motion_tori(const HolomorphicMotionSpec& normalized,
                             const MotionToriConfig& config = {});

struct MotionExtensionConfig {
  MotionToriConfig tori;
  FoliationConfig foliation;
  double coincidence_tol = 1e-6;  // per-point uniqueness echo budget
};

// The extended trajectory of a new point: boundary samples of
// f~(sample_radius e^{i theta}, a_new) with certificates.
struct MotionExtension {
  BoundaryFunction trajectory;  // j -> f~(sample_radius e^{i theta_j}, a_new)
  double sample_radius = 0.9;
  std::vector<Complex> series{};  // fitted coefficients c_k, k >= 1, in lambda
  Complex base_value{};         // interior value f~(0, a_new)
  double base_identity_error = 0.0;          // |f~(0, a_new) - a_new|
  std::vector<double> coincidence_errors{};  // per-point sup |leaf - f(., a_i)|
  double holo_residual = 0.0;                // negative-frequency energy
  double min_separation = 0.0;               // min_j min_i |f~ - f(., a_i)|
  double leaf_level = 0.0;                   // diagnostics of the selected leaf
  double leaf_anchor = 0.0;

  // f~(lambda, a_new) for |lambda| <= sample_radius via the power series
  // of the boundary trace.
  Complex evaluate(Complex lambda) const;

  std::string to_json() const;
};

// The finite one-point extension: normalize, build the flowed tori, fill
// them, select the leaf whose interior value at 0 is the new point, map
// back.  Errors: PointsCollide (a_new collides with a data point),
// CoincidenceCheckFailed (a data leaf fails to reproduce its trajectory
// within config.coincidence_tol; message carries the per-point errors),
// and everything the pipeline can raise.
MotionExtension extend_motion(const HolomorphicMotionSpec& spec, Complex a_new,
                              const MotionExtensionConfig& config = {});

// Re-run the extension at several sample radii and measure how the
// interior evaluations disagree on the common disk: a convergence sweep
// standing in for the radius-to-one limit.
struct MotionSweep {
  std::vector<double> radii;
  std::vector<MotionExtension> extensions;
  double max_disagreement = 0.0;  // pairwise sup on the shared circle

  std::string to_json() const;
};
MotionSweep extend_motion_sweep(const HolomorphicMotionSpec& spec, Complex a_new,
                                const std::vector<double>& radii,
                                const MotionExtensionConfig& config = {});

}  // namespace torusfill
