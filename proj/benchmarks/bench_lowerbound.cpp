#include <benchmark/benchmark.h>

#include "wignerscope/lowerbound.hpp"

using namespace wignerscope;

static void BM_TauDiag(benchmark::State& state) {
  const BumpSpec bump{0.1, 1.0};
  const SmoothnessClass cls{0.5, 1.0, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(tau_diag(bump, cls, 0.2, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_TauDiag)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_RhoDiag(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(rho_alpha_xi_diag({0.2, 0.95}, 2000));
}
BENCHMARK(BM_RhoDiag)->Unit(benchmark::kMillisecond);
