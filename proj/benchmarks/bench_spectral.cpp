#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "torusfill/boundary_function.hpp"
#include "torusfill/circle_ops.hpp"
#include "torusfill/disk_solver.hpp"
#include "torusfill/fft.hpp"
#include "torusfill/foliation.hpp"
#include "torusfill/torus_family.hpp"

using namespace torusfill;

namespace {

std::shared_ptr<const TorusFamily> bump_family() {
  static auto family = [] {
    TorusFamilySpec spec;  // r1 = 1 + 0.1 cos(psi)
    spec.profile = ProfileSeries({{0, 0, Complex(1.0, 0.0)}, {0, 1, Complex(0.1, 0.0)}});
    return make_torus_family(spec);
  }();
  return family;
}

HolomorphicDisk bump_leaf(std::size_t grid) {
  const auto family = bump_family();
  const double collar = family->collar_level();
  auto seed = BoundaryFunction::constant(grid, Complex(std::sqrt(collar), 0.0));
  auto start = solve_disk(*family, collar, seed);
  return continue_in_t(*family, start, 0.8).back();
}

}  // namespace

static void BM_FFT(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  std::vector<Complex> data(n);
  for (std::size_t j = 0; j < n; ++j) data[j] = std::polar(1.0, 0.1 * double(j));
  for (auto _ : state) {
    auto copy = data;
    fft::transform(copy, false);
    benchmark::DoNotOptimize(copy.data());
  }
  state.SetComplexityN(int64_t(n));
}
BENCHMARK(BM_FFT)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

static void BM_Hilbert(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  auto u = BoundaryFunction::from_function(
      n, [](double t) { return Complex(std::cos(3.0 * t) + 0.2 * std::sin(9.0 * t), 0.0); });
  for (auto _ : state) {
    auto h = hilbert_transform(u, HilbertNormalization::center);
    benchmark::DoNotOptimize(h.sample(0));
  }
}
BENCHMARK(BM_Hilbert)->Arg(256)->Arg(1024);

static void BM_Level(benchmark::State& state) {
  const auto family = bump_family();
  const Complex lambda = std::polar(1.0, 0.7);
  const Complex w = std::polar(0.9, 1.3);  // outside the collar: full root-find
  for (auto _ : state) benchmark::DoNotOptimize(family->level(lambda, w));
}
BENCHMARK(BM_Level);

static void BM_Gradients(benchmark::State& state) {
  const auto family = bump_family();
  const Complex lambda = std::polar(1.0, 0.7);
  const Complex w = std::polar(0.9, 1.3);
  for (auto _ : state) {
    auto g = family->gradients(lambda, w);
    benchmark::DoNotOptimize(g.f_w);
  }
}
BENCHMARK(BM_Gradients);

static void BM_NewtonStep(benchmark::State& state) {
  const auto family = bump_family();
  const auto leaf = bump_leaf(std::size_t(state.range(0)));
  for (auto _ : state) {
    auto [next, residual] = newton_step(*family, 0.81, leaf.boundary);
    benchmark::DoNotOptimize(residual);
    benchmark::DoNotOptimize(next.sample(0));
  }
}
BENCHMARK(BM_NewtonStep)->Arg(256)->Arg(512);

static void BM_SolveDisk(benchmark::State& state) {
  const auto family = bump_family();
  const auto leaf = bump_leaf(256);
  for (auto _ : state) {
    auto disk = solve_disk(*family, 0.81, leaf.boundary);
    benchmark::DoNotOptimize(disk.trace_residual);
  }
}
BENCHMARK(BM_SolveDisk);

static void BM_ContinueToOuterTorus(benchmark::State& state) {
  const auto family = bump_family();
  const double collar = family->collar_level();
  auto seed = BoundaryFunction::constant(256, Complex(std::sqrt(collar), 0.0));
  const auto start = solve_disk(*family, collar, seed);
  for (auto _ : state) {
    auto path = continue_in_t(*family, start, 1.0);
    benchmark::DoNotOptimize(path.back().trace_residual);
  }
}
BENCHMARK(BM_ContinueToOuterTorus)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
