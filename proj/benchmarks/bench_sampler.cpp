#include <benchmark/benchmark.h>

#include "wignerscope/sampler.hpp"

using namespace wignerscope;

static void BM_SampleIdeal(benchmark::State& state) {
  const DensityMatrix rho = materialize(parse_state_spec(state.range(0) ? "cat:3" : "fock:1"));
  SamplerConfig config;
  config.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sample_ideal(rho, 100000, 9, config));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * 100000);
}
BENCHMARK(BM_SampleIdeal)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_AddNoise(benchmark::State& state) {
  const auto ideal = sample_ideal(materialize(parse_state_spec("fock:0")), 100000, 9);
  for (auto _ : state) benchmark::DoNotOptimize(add_noise(ideal, 0.9, 10, 1));
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * 100000);
}
BENCHMARK(BM_AddNoise)->Unit(benchmark::kMillisecond);
