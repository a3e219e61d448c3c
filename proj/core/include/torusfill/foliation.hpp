#pragma once

#include <memory>
#include <string>
#include <vector>

#include "torusfill/disk_solver.hpp"
#include "torusfill/torus_family.hpp"

namespace torusfill {

struct FoliationConfig {
  SolverConfig solver{};
  std::size_t grid = BoundaryFunction::kDefaultGrid;  // samples per leaf boundary
  double alpha_min = 1e-3;  // minimum admissible transversality angle (rad)
  double point_tol = 1e-8;  // |leaf(0) - w0| certificate for leaf_through_point
  int probe_leaves = 32;    // anchor-bank size for the level search
};

// A level-t family of pairwise disjoint holomorphic graph disks whose
// boundary traces cover the level-t torus.  Leaves are indexed by their
// collar anchor xi_m = 2 pi m / M: each one is the continuation in t of
// the constant disk g = sqrt(collar_level) e^{i xi_m}, where every fiber
// is an exact circle and the constants trivially foliate it.
struct Foliation {
  std::shared_ptr<const TorusFamily> family;
  double level = 0.0;
  std::vector<double> anchors;          // xi_m, increasing in [0, 2 pi)
  std::vector<HolomorphicDisk> leaves;  // one per anchor, all at `level`
  std::vector<int> continuation_steps;  // accepted levels per leaf
  double disjointness_margin = 0.0;
  double min_transversality = 0.0;

  std::string to_json() const;
};

// Seed leaf_count constant disks at the collar level and march each to
// t_target with continue_in_t, then certify pairwise disjointness and
// transversality to the fibers.  Errors: InvalidInput (leaf_count < 8,
// missing family), OutOfRange (t_target outside (0, max_level]),
// ContinuationError tagged with the stuck leaf's index, and
// FoliationDegenerate when a post-check fails.
Foliation build_foliation(std::shared_ptr<const TorusFamily> family, double t_target,
                          int leaf_count, const FoliationConfig& config = {});

// Minimum over all leaf pairs and over a shared sample set (boundary grid
// plus an interior polar grid plus the center) of |g_xi(z) - g_eta(z)|.
// Must be strictly positive for a genuine foliation.
double disjointness_check(const Foliation& foliation);

// Minimum over all leaves and boundary samples of the unoriented angle in
// R^4 between the trace tangent d/dtheta (e^{i theta}, g(e^{i theta})) and
// the fiber tangent (0, d/dpsi curve_point) at the same point.  Constant
// leaves over circular fibers give exactly pi/2.
double transversality_angle(const Foliation& foliation);

struct LeafLocation {
  double t = 0.0;   // level of the located leaf
  double xi = 0.0;  // collar anchor, in [0, 2 pi)
  HolomorphicDisk leaf;
};

// Locate the unique leaf with center value g(0) = w0.  Inside the collar
// the answer is the constant disk at level |w0|^2.  Outside, a bank of
// probe_leaves anchors is marched upward while the winding number of
// xi -> g_xi(0) - w0 is watched (0 before the sweeping curve reaches w0,
// 1 after); bisection brackets the crossing level and a damped 2-D Newton
// iteration in (t, xi) pins it down, re-marching a single leaf from the
// collar for every evaluation so the anchor label stays meaningful.
// Errors: InvalidInput (w0 = 0), PointNotEnclosed (w0 never swept up to
// max_level), TargetToleranceMissed (refinement stalled above point_tol).
LeafLocation leaf_through_point(std::shared_ptr<const TorusFamily> family, Complex w0,
                                const FoliationConfig& config = {});

// Empirical uniqueness check: re-solve at the same level from a seed
// perturbed by `perturbation_scale`, then re-anchor the result by repeated
// constant shifts until it shares the leaf's value at lambda = 1, and
// return sup |g - h| over the boundary grid.  Small output means the
// anchored solution is unique in practice.
double uniqueness_probe(const TorusFamily& family, double t, const HolomorphicDisk& leaf,
                        double perturbation_scale, const SolverConfig& config = {});

}  // namespace torusfill
