#include <benchmark/benchmark.h>

#include "cfopt/adjoint.hpp"
#include "cfopt/dynamics.hpp"
#include "cfopt/problem.hpp"

namespace {

using namespace cfopt;

struct Fixture {
  explicit Fixture(std::size_t n)
      : grid(make_grid(n, 25.0)),
        mats(precompute(KernelSet{}, grid)),
        f(GaussianInitial{}.sample(grid)) {}
  Grid grid;
  KernelMatrices mats;
  Vector f;
};

void BM_ApplyC(benchmark::State& state) {
  const Fixture fx(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(apply_C(fx.f, fx.mats, fx.grid));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ApplyC)->RangeMultiplier(2)->Range(100, 1600)->Complexity(benchmark::oNSquared);

void BM_ApplyF(benchmark::State& state) {
  const Fixture fx(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(apply_F(fx.f, fx.mats, fx.grid));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ApplyF)->RangeMultiplier(2)->Range(100, 1600)->Complexity(benchmark::oNSquared);

void BM_Precompute(benchmark::State& state) {
  const Grid grid = make_grid(static_cast<std::size_t>(state.range(0)), 25.0);
  for (auto _ : state) benchmark::DoNotOptimize(precompute(KernelSet{}, grid));
}
BENCHMARK(BM_Precompute)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_ForwardSolve(benchmark::State& state) {
  const Fixture fx(800);
  const TimeGrid t = make_time_grid(1.0, 0.005);
  const Control u = Control::constant(t.n_steps, 1.0, {0.1, 3.0});
  for (auto _ : state) benchmark::DoNotOptimize(forward_solve(fx.f, u, fx.mats, fx.grid, t));
}
BENCHMARK(BM_ForwardSolve)->Unit(benchmark::kMillisecond);

void BM_BackwardSolve(benchmark::State& state) {
  const Fixture fx(800);
  const TimeGrid t = make_time_grid(1.0, 0.005);
  const Control u = Control::constant(t.n_steps, 1.0, {0.1, 3.0});
  const Trajectory traj = forward_solve(fx.f, u, fx.mats, fx.grid, t);
  const CostConfig cost;
  for (auto _ : state) {
    benchmark::DoNotOptimize(backward_solve(u, traj, cost, fx.mats, fx.grid, t));
  }
}
BENCHMARK(BM_BackwardSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
