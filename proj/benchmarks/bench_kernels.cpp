#include <benchmark/benchmark.h>

#include "wignerscope/kernels.hpp"

using namespace wignerscope;

static void BM_KernelEval(benchmark::State& state) {
  const KernelSpec spec(0.3, NoiseModel(0.9));
  double u = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel_eval(spec, u));
    u = u > 20.0 ? 0.0 : u + 0.37;
  }
}
BENCHMARK(BM_KernelEval);

static void BM_BuildTable(benchmark::State& state) {
  const auto variant = state.range(0) ? KernelVariant::modified : KernelVariant::sharp;
  const KernelSpec spec(0.3, NoiseModel(0.9), variant);
  for (auto _ : state) benchmark::DoNotOptimize(build_table(spec, 15.0, suggested_table_step(spec)));
}
BENCHMARK(BM_BuildTable)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
