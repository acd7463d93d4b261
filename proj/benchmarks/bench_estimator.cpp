#include <benchmark/benchmark.h>

#include "wignerscope/estimator.hpp"

using namespace wignerscope;

static void BM_EstimatePoint(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset ds = simulate(parse_state_spec("fock:1"), n, 0.9, 3);
  const KernelSpec spec(0.3, NoiseModel(0.9));
  const KernelTable table = build_table(spec, table_range(ds, spec, 2.0), suggested_table_step(spec));
  const WignerEstimator est(ds, table, 1);
  for (auto _ : state) benchmark::DoNotOptimize(est({0.5, -0.25}));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_EstimatePoint)->Arg(10000)->Arg(100000)->Unit(benchmark::kMicrosecond);

static void BM_EstimateGrid(benchmark::State& state) {
  const Dataset ds = simulate(parse_state_spec("fock:1"), 5000, 0.9, 3);
  const KernelSpec spec(0.3, NoiseModel(0.9));
  const GridSpec grid = GridSpec::parse("-3:3:41,-3:3:41");
  for (auto _ : state) benchmark::DoNotOptimize(estimate_grid(ds, spec, grid, 1));
}
BENCHMARK(BM_EstimateGrid)->Unit(benchmark::kMillisecond);

static void BM_Bandwidth(benchmark::State& state) {
  const BandwidthRule rule = BandwidthRule::parse("opt", {0.5, 1.0, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(bandwidth(rule, 1000000, NoiseModel(0.9)));
}
BENCHMARK(BM_Bandwidth);
