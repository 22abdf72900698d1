#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "encircle/assignment.hpp"
#include "encircle/controller.hpp"
#include "encircle/estimator.hpp"
#include "encircle/runner.hpp"
#include "encircle/scenario.hpp"

using namespace encircle;

static void BM_DtseUpdate(benchmark::State& state) {
  const SystemMatrices mats(0.8);
  const Mat2 Q = 0.05 * Mat2::Identity();
  MeasurementRecord m;
  m.C << -0.26, -1.98, 0.0, 0.0;
  m.theta = -5.3;
  m.var_hat = 0.02;
  EstimatorState est;
  for (auto _ : state) {
    est = dtse_update(est, m, Q, mats);
    benchmark::DoNotOptimize(est);
  }
}
BENCHMARK(BM_DtseUpdate);

static void BM_ComputeForces(benchmark::State& state) {
  const SystemMatrices mats(0.8);
  const ControllerParams params;
  ForceContext ctx;
  ctx.position = Vec3(0.4, 0.1, 2.0);
  ctx.s_hat = Vec2(0.0, 0.0);
  ctx.nu_hat = Vec2(0.3, 0.2);
  ctx.shape = preset_shape(5, PresetShape{});
  for (int i = 0; i < state.range(0); ++i) {
    const double a = 0.7 * i;
    ctx.neighbors.push_back(ctx.position + 0.6 * Vec3(std::cos(a), std::sin(a), 0.0));
    ctx.obstacles.push_back(ctx.position + 0.35 * Vec3(std::sin(a), std::cos(a), 0.0));
  }
  for (auto _ : state) benchmark::DoNotOptimize(compute_forces(ctx, params, mats));
}
BENCHMARK(BM_ComputeForces)->Arg(1)->Arg(5)->Arg(20);

static void BM_RunAssignment(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int n = 2 * m;
  AssignmentProblem p;
  p.num_targets = m;
  p.num_drones = n;
  for (int i = 0; i < n; ++i) {
    std::vector<std::optional<double>> row;
    for (int j = 0; j < m; ++j) row.push_back(1.0 + std::abs(0.5 * i - 1.0 * j));
    p.distances.push_back(row);
    std::vector<int> nb;
    for (int g = 0; g < n; ++g) {
      if (g != i) nb.push_back(g);
    }
    p.neighbors.push_back(nb);
  }
  for (auto _ : state) benchmark::DoNotOptimize(run_assignment(p, {}));
}
BENCHMARK(BM_RunAssignment)->Arg(3)->Arg(6)->Arg(12);

static void BM_GoldenRun(benchmark::State& state) {
  const ScenarioConfig cfg = golden_scenario();
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(cfg).summary.log_hash);
  state.SetItemsProcessed(state.iterations() * cfg.steps);
}
BENCHMARK(BM_GoldenRun)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
