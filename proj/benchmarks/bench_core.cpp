#include <benchmark/benchmark.h>

#include "cav/planner.hpp"
#include "cav/scenario_io.hpp"
#include "cav/simulation.hpp"

namespace {

const cav::Scenario& reference() {
  static const cav::Scenario s =
      cav::load_scenario(CAVSIM_SOURCE_DIR "/scenarios/reference.json");
  return s;
}

void BM_SolveBoundary(benchmark::State& state) {
  double tf = 20.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cav::solve_boundary(10.0, 275.0, 0.0, tf));
    tf = tf > 30.0 ? 20.0 : tf + 1e-3;
  }
}
BENCHMARK(BM_SolveBoundary);

void BM_Invert(benchmark::State& state) {
  const auto traj = cav::solve_boundary(10.0, 275.0, 0.0, 22.0);
  double p = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cav::invert(traj, p));
    p = p > 270.0 ? 0.0 : p + 1.37;
  }
}
BENCHMARK(BM_Invert);

void BM_PlanLastReferenceVehicle(benchmark::State& state) {
  const auto& s = reference();
  auto [protocol, request] = cav::protocol_before(s, s.arrivals.back().id);
  const auto config = s.planner_config();
  for (auto _ : state) {
    benchmark::DoNotOptimize(cav::plan(request, protocol, config));
  }
}
BENCHMARK(BM_PlanLastReferenceVehicle)->Unit(benchmark::kMicrosecond);

void BM_RunReference(benchmark::State& state) {
  const auto& s = reference();
  for (auto _ : state) {
    benchmark::DoNotOptimize(cav::run(s));
  }
}
BENCHMARK(BM_RunReference)->Unit(benchmark::kMillisecond);

void BM_RunGenerated(benchmark::State& state) {
  cav::GeneratorOptions g;
  g.seed = 1;
  g.vehicles = static_cast<int>(state.range(0));
  g.min_gap = 2.0;
  g.max_gap = 4.0;
  const auto s = cav::generate_scenario(g);
  for (auto _ : state) {
    try {
      benchmark::DoNotOptimize(cav::run(s));
    } catch (const cav::PlanningFailure&) {
      state.SkipWithError("scenario not plannable");
      break;
    }
  }
}
BENCHMARK(BM_RunGenerated)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
