#include <benchmark/benchmark.h>

#include "hira/para_analysis.hpp"

using namespace hira;

static void BM_SolvePth(benchmark::State& state) {
  ParaParams p;
  p.n_rh = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_p_th(p).p_th);
  }
}
BENCHMARK(BM_SolvePth)->Arg(64)->Arg(1024)->Arg(9600);

static void BM_ExactChainDp(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_success_dp(0.4, n, 4 * n));
  }
}
BENCHMARK(BM_ExactChainDp)->Arg(16)->Arg(64)->Arg(256);

static void BM_MonteCarlo(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(monte_carlo_p_rh(0.4, 16, 64, 100000, 7).mean);
  }
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_MonteCarlo);

BENCHMARK_MAIN();
