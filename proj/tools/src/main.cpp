#include <CLI11.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "torusfill/barriers.hpp"
#include "torusfill/boundary_function.hpp"
#include "torusfill/circle_ops.hpp"
#include "torusfill/disk_solver.hpp"
#include "torusfill/errors.hpp"
#include "torusfill/fft.hpp"
#include "torusfill/foliation.hpp"
#include "torusfill/motion.hpp"
#include "torusfill/torus_family.hpp"

using namespace torusfill;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::InvalidInput, "cannot open input file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Output sink: --out path or stdout.  Text is written exactly once, fully
// assembled, so identical runs produce byte-identical files.
void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    if (!text.empty() && text.back() != '\n') std::fputc('\n', stdout);
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) fail(ErrorCode::InvalidInput, "cannot open output file: " + out_path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

Complex parse_point(const std::string& text) {
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) return Complex(std::stod(text), 0.0);
    return Complex(std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1)));
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidInput, "points are written re,im — got '" + text + "'");
  }
}

std::shared_ptr<const TorusFamily> family_from_file(const std::string& path) {
  return make_torus_family(TorusFamilySpec::from_json(read_file(path)));
}

// March a constant collar disk up to the requested level; the shared way
// every command that needs a disk at level t seeds one deterministically.
HolomorphicDisk disk_at_level(const TorusFamily& family, double t, double xi,
                              const SolverConfig& config,
                              std::size_t grid = BoundaryFunction::kDefaultGrid) {
  const double collar = family.collar_level();
  auto seed = BoundaryFunction::constant(grid, std::polar(std::sqrt(collar), xi));
  auto start = solve_disk(family, collar, seed, config);
  if (t == collar) return start;
  auto path = continue_in_t(family, start, t, config);
  return path.back();
}

std::string csv_of_boundary(const std::vector<std::pair<double, BoundaryFunction>>& rows,
                            double lambda_modulus) {
  std::ostringstream csv;
  csv << "xi,re_lambda,im_lambda,re_g,im_g\n";
  csv.setf(std::ios::scientific);
  csv.precision(16);
  for (const auto& [xi, g] : rows)
    for (std::size_t j = 0; j < g.size(); ++j) {
      const Complex lambda = std::polar(lambda_modulus, g.theta(j));
      csv << xi << ',' << lambda.real() << ',' << lambda.imag() << ',' << g.sample(j).real()
          << ',' << g.sample(j).imag() << '\n';
    }
  return csv.str();
}

struct CommonFlags {
  std::string out_path;
  std::size_t grid = BoundaryFunction::kDefaultGrid;
  double tol = 1e-10;
  unsigned threads = 1;

  SolverConfig solver() const {
    SolverConfig config;
    config.tol = tol;
    return config;
  }
  FoliationConfig foliation() const {
    FoliationConfig config;
    config.solver = solver();
    config.grid = grid;
    return config;
  }
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--out", flags.out_path, "write the report here instead of stdout");
  cmd->add_option("--grid", flags.grid, "boundary samples per curve (power of two >= 16)")
      ->check(CLI::Range(std::size_t(16), std::size_t(65536)));
  cmd->add_option("--tol", flags.tol, "trace-residual target for the disk solver")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", flags.threads,
                  "worker threads (reserved; the solver currently runs single-threaded)")
      ->check(CLI::Range(1u, 256u));
}

int cmd_validate_torus(const std::string& spec_path, const CommonFlags& flags) {
  auto spec = TorusFamilySpec::from_json(read_file(spec_path));
  auto report = validate_spec(spec);
  emit(flags.out_path, report.to_json());
  return report.passed ? 0 : 2;
}

int cmd_solve_disk(const std::string& spec_path, double t, const std::string& seed_path,
                   double xi, const CommonFlags& flags) {
  auto family = family_from_file(spec_path);
  HolomorphicDisk disk = [&] {
    if (seed_path.empty()) return disk_at_level(*family, t, xi, flags.solver(), flags.grid);
    auto g0 = BoundaryFunction::from_json(read_file(seed_path));
    if (g0.size() != flags.grid) g0 = resample(g0, flags.grid);
    return solve_disk(*family, t, g0, flags.solver());
  }();
  nlohmann::json j = nlohmann::json::parse(disk.to_json());
  j["boundary_derivative_sup"] = theta_derivative(disk.boundary).sup_norm();
  j["trace_equation_derivative_residual"] = boundary_equation_residual(*family, disk);
  emit(flags.out_path, j.dump());
  return 0;
}

int cmd_continue(const std::string& spec_path, double t_from, double t_to, double xi,
                 const CommonFlags& flags) {
  auto family = family_from_file(spec_path);
  auto start = disk_at_level(*family, t_from, xi, flags.solver(), flags.grid);
  auto path = continue_in_t(*family, start, t_to, flags.solver());
  std::ostringstream lines;  // one disk per line: streamable path output
  for (const auto& disk : path) lines << disk.to_json() << '\n';
  emit(flags.out_path, lines.str());
  return 0;
}

int cmd_foliate(const std::string& spec_path, double t, std::size_t leaves,
                const std::string& csv_path, const CommonFlags& flags) {
  auto family = family_from_file(spec_path);
  auto foliation = build_foliation(family, t, leaves, flags.foliation());
  auto bound = derivative_bound_check(foliation.leaves);
  nlohmann::json j = nlohmann::json::parse(foliation.to_json());
  j["derivative_bound"] = nlohmann::json::parse(bound.to_json());
  if (!csv_path.empty()) {  // side files first: stdout may be a closed pipe
    std::vector<std::pair<double, BoundaryFunction>> rows;
    for (std::size_t m = 0; m < foliation.leaves.size(); ++m)
      rows.emplace_back(foliation.anchors[m], foliation.leaves[m].boundary);
    emit(csv_path, csv_of_boundary(rows, 1.0));
  }
  emit(flags.out_path, j.dump());
  return bound.passed ? 0 : 2;
}

int cmd_leaf_through(const std::string& spec_path, const std::string& point,
                     const CommonFlags& flags) {
  auto family = family_from_file(spec_path);
  auto located = leaf_through_point(family, parse_point(point), flags.foliation());
  nlohmann::json j;
  j["t"] = located.t;
  j["xi"] = located.xi;
  j["leaf"] = nlohmann::json::parse(located.leaf.to_json());
  emit(flags.out_path, j.dump());
  return 0;
}

int cmd_verify_barriers(const std::string& spec_path, double eps, double kappa, double beta,
                        const std::vector<double>& trap_levels, const CommonFlags& flags) {
  auto family = family_from_file(spec_path);
  Barrier shaped{BarrierKind::phi, kappa, beta, 1.0, eps};
  Barrier log_shaped{BarrierKind::psi, kappa, beta, 1.0, eps};
  Barrier weight{BarrierKind::omega_eps, kappa, beta, 1.0, eps};
  Barrier co_weight{BarrierKind::sigma_eps, kappa, beta, 1.0, eps};

  auto phi_report = laplacian_sign_check(shaped, *family);
  auto psi_report = laplacian_sign_check(log_shaped, *family);
  const double omega_eigen = hessian_min_eigen(weight, *family);
  const double sigma_eigen = hessian_min_eigen(co_weight, *family);

  nlohmann::json j;
  j["eps"] = eps;
  j["kappa"] = kappa;
  j["beta"] = beta;
  j["phi"] = nlohmann::json::parse(phi_report.to_json());
  j["psi"] = nlohmann::json::parse(psi_report.to_json());
  j["omega_eps"] = {{"min_eigen", omega_eigen}, {"passed", omega_eigen > 0.0}};
  j["sigma_eps"] = {{"min_eigen", sigma_eigen}, {"passed", sigma_eigen > 0.0}};

  bool all_ok = phi_report.passed && psi_report.passed && omega_eigen > 0.0 && sigma_eigen > 0.0;
  if (!trap_levels.empty()) {
    auto& traps = j["trapping"] = nlohmann::json::array();
    for (double level : trap_levels) {
      auto disk = disk_at_level(*family, level, 0.0, flags.solver());
      auto report = trapping_check(disk, weight, *family);
      nlohmann::json entry = nlohmann::json::parse(report.to_json());
      entry["level"] = level;
      traps.push_back(std::move(entry));
      all_ok = all_ok && report.trapped;
    }
  }
  emit(flags.out_path, j.dump());
  return all_ok ? 0 : 2;
}

int cmd_extend_motion(const std::string& motion_path, const std::string& new_point,
                      double r0_override, const std::string& csv_path,
                      const CommonFlags& flags) {
  auto spec = HolomorphicMotionSpec::from_json(read_file(motion_path));
  if (r0_override > 0.0) spec.sample_radius = r0_override;
  MotionExtensionConfig config;
  config.foliation = flags.foliation();
  config.tori.base_knots = std::max<std::size_t>(config.tori.base_knots, flags.grid);
  auto ext = extend_motion(spec, parse_point(new_point), config);
  if (!csv_path.empty())
    emit(csv_path, csv_of_boundary({{0.0, ext.trajectory}}, ext.sample_radius));
  emit(flags.out_path, ext.to_json());
  return 0;
}

// Built-in smoke checks: spectral identities, the constant-leaf oracle on
// the round family, and exact linear reproduction of the velocity field.
int cmd_self_test(const CommonFlags& flags) {
  std::ostringstream report;
  bool all_ok = true;
  auto check = [&](const std::string& name, double error, double budget) {
    const bool ok = error <= budget;
    all_ok = all_ok && ok;
    report << (ok ? "ok   " : "FAIL ") << name << "  (error " << error << ", budget " << budget
           << ")\n";
  };

  {
    auto u = BoundaryFunction::from_function(256, [](double theta) {
      return Complex(std::cos(3.0 * theta) - 0.4 * std::sin(7.0 * theta), 0.0);
    });
    auto h = hilbert_transform(u, HilbertNormalization::center);
    auto expected = BoundaryFunction::from_function(256, [](double theta) {
      return Complex(std::sin(3.0 * theta) + 0.4 * std::cos(7.0 * theta), 0.0);
    });
    double err = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j)
      err = std::max(err, std::abs(h.sample(j) - expected.sample(j)));
    check("hilbert transform of a trigonometric polynomial", err, 1e-12);
  }
  {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    std::vector<Complex> samples(128);
    for (auto& s : samples) s = Complex(value(rng), value(rng));
    auto back = fft::synthesize(fft::analyze(samples));
    double err = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j)
      err = std::max(err, std::abs(back[j] - samples[j]));
    check("spectral analysis round trip", err, 1e-12);
  }
  {
    TorusFamilySpec round;
    round.profile = ProfileSeries::constant(1.0);
    auto family = make_torus_family(round);
    auto disk = disk_at_level(*family, 0.49, 0.7, flags.solver());
    const Complex expected = std::polar(0.7, 0.7);
    double err = 0.0;
    for (std::size_t j = 0; j < disk.boundary.size(); ++j)
      err = std::max(err, std::abs(disk.boundary.sample(j) - expected));
    check("round-family leaves are constants", err, 1e-9);
  }
  {
    HolomorphicMotionSpec motion;
    motion.points = {Complex(0.0), Complex(1.5, 0.5)};
    motion.trajectories = {{}, {Complex(0.3, 0.1)}};
    auto field = build_velocity_field(motion, 0.5, 1.1);
    const Complex p = motion.value(1, std::polar(0.5, 1.1));
    const Complex v = motion.radial_velocity(1, 0.5, 1.1);
    const Complex probe(0.21, -0.33);
    check("velocity field reproduces a dilation exactly",
          std::abs(field(probe) - v / p * probe), 1e-12);
  }

  emit(flags.out_path, report.str());
  return all_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"torusfill: spectral disk filling for star-shaped torus families"};
  app.require_subcommand(0, 1);

  struct {
    std::string spec_path, seed_path, motion_path, csv_path, point;
    double t = 0.5, t_from = 0.1, t_to = 1.0, xi = 0.0;
    double eps = 0.01, kappa = 0.5, beta = 2.0, r0 = 0.0;
    std::size_t leaves = 32;
    std::vector<double> trap_levels;
  } args;
  CommonFlags flags;

  auto* validate = app.add_subcommand("validate-torus", "check a torus family blueprint");
  validate->add_option("spec", args.spec_path, "family JSON file")->required();
  add_common(validate, flags);

  auto* solve = app.add_subcommand("solve-disk", "fill one leaf at a level");
  solve->add_option("spec", args.spec_path, "family JSON file")->required();
  solve->add_option("--t", args.t, "target level")->required();
  solve->add_option("--seed", args.seed_path, "boundary seed JSON (defaults to a collar leaf)");
  solve->add_option("--xi", args.xi, "collar anchor angle for the default seed");
  add_common(solve, flags);

  auto* cont = app.add_subcommand("continue", "march a leaf between levels (JSON lines)");
  cont->add_option("spec", args.spec_path, "family JSON file")->required();
  cont->add_option("--from", args.t_from, "starting level")->required();
  cont->add_option("--to", args.t_to, "final level")->required();
  cont->add_option("--xi", args.xi, "collar anchor angle of the marched leaf");
  add_common(cont, flags);

  auto* foliate = app.add_subcommand("foliate", "fill a torus by leaves and certify");
  foliate->add_option("spec", args.spec_path, "family JSON file")->required();
  foliate->add_option("--t", args.t, "target level")->required();
  foliate->add_option("--leaves", args.leaves, "number of anchors");
  foliate->add_option("--csv", args.csv_path, "also write (xi, lambda, g) rows here");
  add_common(foliate, flags);

  auto* leaf = app.add_subcommand("leaf-through", "locate the unique leaf through a point");
  leaf->add_option("spec", args.spec_path, "family JSON file")->required();
  leaf->add_option("--point", args.point, "interior point re,im")->required();
  add_common(leaf, flags);

  auto* barriers = app.add_subcommand("verify-barriers", "pseudoconvexity certificates");
  barriers->add_option("spec", args.spec_path, "family JSON file")->required();
  barriers->add_option("--eps", args.eps, "pseudoconvexity weight")->check(CLI::PositiveNumber);
  barriers->add_option("--kappa", args.kappa, "convexifier curvature");
  barriers->add_option("--beta", args.beta, "concavifier curvature")->check(CLI::PositiveNumber);
  barriers->add_option("--trap-level", args.trap_levels,
                       "also trap-check a leaf marched to this level (repeatable)");
  add_common(barriers, flags);

  auto* motion = app.add_subcommand("extend-motion", "extend a finite holomorphic motion");
  motion->add_option("motion", args.motion_path, "motion JSON file")->required();
  motion->add_option("--new", args.point, "new point re,im")->required();
  motion->add_option("--r0", args.r0, "override the sample radius");
  motion->add_option("--csv", args.csv_path, "also write the trajectory as CSV rows");
  add_common(motion, flags);

  auto* self = app.add_subcommand("self-test", "built-in spectral and solver smoke checks");
  add_common(self, flags);

  CLI11_PARSE(app, argc, argv);
  if (app.get_subcommands().empty()) {
    std::puts(app.help().c_str());
    return 0;
  }

  try {
    if (validate->parsed()) return cmd_validate_torus(args.spec_path, flags);
    if (solve->parsed()) return cmd_solve_disk(args.spec_path, args.t, args.seed_path, args.xi, flags);
    if (cont->parsed()) return cmd_continue(args.spec_path, args.t_from, args.t_to, args.xi, flags);
    if (foliate->parsed())
      return cmd_foliate(args.spec_path, args.t, args.leaves, args.csv_path, flags);
    if (leaf->parsed()) return cmd_leaf_through(args.spec_path, args.point, flags);
    if (barriers->parsed())
      return cmd_verify_barriers(args.spec_path, args.eps, args.kappa, args.beta,
                                 args.trap_levels, flags);
    if (motion->parsed())
      return cmd_extend_motion(args.motion_path, args.point, args.r0, args.csv_path, flags);
    if (self->parsed()) return cmd_self_test(flags);
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return is_input_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
