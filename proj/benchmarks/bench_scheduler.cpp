#include <benchmark/benchmark.h>

#include "hira/scheduler.hpp"

using namespace hira;

namespace {

Geometry bench_geom() {
  Geometry g;
  g.banks_per_rank = 16;
  g.subarrays_per_bank = 8;
  g.rows_per_subarray = 64;
  g.columns_per_row = 1024;
  return g;
}

void run_mixed(SchedulerMode mode, benchmark::State& state) {
  const Geometry g = bench_geom();
  TimingParams tp;
  tp.tREFW = 64000000;  // 64 us desk window
  tp.tREFI = 8000000;
  tp.tRFC = 400000;
  for (auto _ : state) {
    state.PauseTiming();
    GroundTruthConfig gt;
    gt.retention_grace = tp.tREFW;
    DramChip chip(g, tp, IsolationMap::adjacent_share(8), ElectricalWindows{},
                  gt);
    SchedulerConfig cfg;
    cfg.mode = mode;
    cfg.para_enabled = mode == SchedulerMode::Hira;
    cfg.p_th = 0.3;
    Controller ctl(chip, cfg, nullptr);
    Rng rng(42);
    DramAddress a;
    for (int i = 0; i < 4000; ++i) {
      a.bank = static_cast<BankId>(rng.next_below(16));
      const RowId row = static_cast<RowId>(rng.next_below(512));
      a.subarray = g.subarray_of(row);
      a.row_in_subarray = g.row_within_subarray(row);
      a.column = static_cast<ColumnId>(rng.next_below(1024));
      ctl.add_request(0, false, a, static_cast<picoseconds>(i) * 4000);
    }
    state.ResumeTiming();
    ctl.run_to_drain(tp.tREFW);
    benchmark::DoNotOptimize(ctl.stats().served);
  }
  state.SetItemsProcessed(state.iterations() * 4000);
}

void BM_SchedulerHira(benchmark::State& state) {
  run_mixed(SchedulerMode::Hira, state);
}

void BM_SchedulerBaselineRef(benchmark::State& state) {
  run_mixed(SchedulerMode::BaselineRef, state);
}

}  // namespace

BENCHMARK(BM_SchedulerHira)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SchedulerBaselineRef)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
