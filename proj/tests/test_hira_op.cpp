#include <algorithm>

#include "doctest.h"
#include "hira/dram_core.hpp"
#include "hira/hira_op.hpp"
#include "hira/rng.hpp"

using namespace hira;

namespace {

Geometry harness_geom() {
  Geometry g;
  g.banks_per_rank = 1;
  g.subarrays_per_bank = 8;
  g.rows_per_subarray = 8;
  g.columns_per_row = 64;
  return g;
}

}  // namespace

TEST_CASE("plan offsets are the engineered schedule") {
  const TimingParams tp;
  HiraConfig cfg;
  cfg.t1 = 3000;
  cfg.t2 = 3000;
  const HiraPlan p = HiraPlan::make(cfg, tp, 5, 70);
  CHECK(p.pre_offset == 3000);
  CHECK(p.second_act_offset == 6000);
  CHECK(p.column_ready_offset == 6000 + tp.tRCD);
  CHECK(p.closing_pre_offset == 6000 + tp.tRAS);
}

TEST_CASE("operating-condition validation returns every violation") {
  const Geometry g = harness_geom();
  const IsolationMap map = IsolationMap::adjacent_share(8);
  const ElectricalWindows w;

  HiraConfig ok;
  ok.t1 = 3000;
  ok.t2 = 3000;
  ok.purpose = HiraPurpose::RefreshAccess;
  CHECK(validate_hira(ok, map, g, g.bank_row(0, 0), g.bank_row(3, 2), w).ok());

  HiraConfig short_t1 = ok;
  short_t1.t1 = 1500;
  const auto v1 =
      validate_hira(short_t1, map, g, g.bank_row(0, 0), g.bank_row(3, 2), w);
  REQUIRE(v1.violated.size() == 1);
  CHECK(v1.violated[0] == HiraCondition::SenseAmpEnable);

  const auto v4 = validate_hira(ok, map, g, g.bank_row(3, 0), g.bank_row(3, 2), w);
  REQUIRE(v4.violated.size() == 1);
  CHECK(v4.violated[0] == HiraCondition::IsolatedSubarrays);

  // The bank-I/O handover constraint only binds refresh-access pairs.
  HiraConfig tight_t2 = ok;
  tight_t2.t2 = 1500;
  const auto v3 =
      validate_hira(tight_t2, map, g, g.bank_row(0, 0), g.bank_row(3, 2), w);
  REQUIRE(v3.violated.size() == 1);
  CHECK(v3.violated[0] == HiraCondition::BankIoDisconnect);
  tight_t2.purpose = HiraPurpose::RefreshRefresh;
  CHECK(validate_hira(tight_t2, map, g, g.bank_row(0, 0), g.bank_row(3, 2), w).ok());

  // Everything wrong at once: the full list comes back.
  HiraConfig bad;
  bad.t1 = 1500;
  bad.t2 = 6000;
  bad.purpose = HiraPurpose::RefreshAccess;
  const auto all =
      validate_hira(bad, map, g, g.bank_row(3, 0), g.bank_row(3, 1), w);
  CHECK(all.violated.size() == 3);

  CHECK_THROWS(validate_hira(ok, map, g, -1, 3, w));
}

TEST_CASE("two-row refresh latency arithmetic") {
  const TimingParams tp;
  HiraConfig cfg;
  cfg.t1 = 3000;
  cfg.t2 = 3000;
  CHECK(two_row_refresh_latency(cfg, tp) == 38000);
  cfg.t1 = cfg.t2 = 4500;
  CHECK(two_row_refresh_latency(cfg, tp) == 41000);
  cfg.t1 = 0;
  cfg.t2 = 0;
  CHECK_THROWS(two_row_refresh_latency(cfg, tp));

  CHECK(baseline_two_row_refresh_latency(tp) == 78250);
  TimingParams even;
  even.tRAS = 10;
  even.tRP = 10;
  even.tRC = 20;
  CHECK(baseline_two_row_refresh_latency(even) == 30);
  TimingParams alt = tp;
  alt.tRP = 14500;
  alt.tRC = alt.tRAS + alt.tRP;
  CHECK(baseline_two_row_refresh_latency(alt) == 78500);
}

TEST_CASE("latency reduction fractions") {
  const TimingParams tp;
  HiraConfig cfg;
  cfg.t1 = cfg.t2 = 3000;
  CHECK(latency_reduction(cfg, tp) == doctest::Approx(0.514).epsilon(0.002));
  cfg.t1 = tp.tRAS;
  cfg.t2 = tp.tRP;
  CHECK(latency_reduction(cfg, tp) == doctest::Approx(0.0));
  cfg.t1 = cfg.t2 = 4500;
  CHECK(latency_reduction(cfg, tp) == doctest::Approx(0.476).epsilon(0.002));
}

TEST_CASE("hira beats the baseline exactly when t1 + t2 < tRAS + tRP") {
  const TimingParams tp;
  for (picoseconds t1 : {1500, 3000, 14250, 32000}) {
    for (picoseconds t2 : {1500, 3000, 14250, 32000}) {
      HiraConfig cfg;
      cfg.t1 = t1;
      cfg.t2 = t2;
      const bool faster =
          two_row_refresh_latency(cfg, tp) < baseline_two_row_refresh_latency(tp);
      CHECK(faster == (t1 + t2 < tp.tRAS + tp.tRP));
    }
  }
}

TEST_CASE("validated plans replay to a clean dual open") {
  // Cross-module property: any configuration accepted by validate_hira,
  // executed on the chip over any row pair and data pattern, ends with both
  // rows restored and no flags; rejected configurations never reach DualOpen.
  const Geometry g = harness_geom();
  const IsolationMap map = IsolationMap::adjacent_share(8);
  const TimingParams tp;
  const ElectricalWindows w;
  Rng rng(7);

  for (int trial = 0; trial < 200; ++trial) {
    const picoseconds choices[] = {1500, 3000, 4500, 6000};
    HiraConfig cfg;
    cfg.t1 = choices[rng.next_below(4)];
    cfg.t2 = choices[rng.next_below(4)];
    cfg.purpose = HiraPurpose::RefreshRefresh;
    const RowId row_a = static_cast<RowId>(rng.next_below(64));
    const RowId row_b = static_cast<RowId>(rng.next_below(64));
    const std::uint8_t patterns[] = {0xFF, 0x00, 0xAA, 0x55};
    const std::uint8_t pat = patterns[rng.next_below(4)];

    DramChip chip(g, tp, map, w, GroundTruthConfig{});
    chip.poke_row(0, 0, row_a, pat, 0);
    chip.poke_row(0, 0, row_b, static_cast<std::uint8_t>(~pat), 0);

    const HiraPlan plan = HiraPlan::make(cfg, tp, row_a, row_b);
    REQUIRE(chip.issue(0, 0, Command::act(row_a), 0).accepted);
    REQUIRE(chip.issue(0, 0, Command::pre(), plan.pre_offset, true).accepted);
    const auto second =
        chip.issue(0, 0, Command::act(row_b), plan.second_act_offset, true);
    REQUIRE(second.accepted);

    const bool valid = validate_hira(cfg, map, g, row_a, row_b, w).ok();
    CHECK((second.hira == HiraOutcome::DualOpen) == valid);

    if (valid) {
      REQUIRE(chip.issue(0, 0, Command::pre(), plan.closing_pre_offset).accepted);
      CHECK(chip.row_state(0, 0, row_a).flags == 0);
      CHECK(chip.row_state(0, 0, row_b).flags == 0);
      CHECK(chip.compare_row(0, 0, row_a, pat));
      CHECK(chip.compare_row(0, 0, row_b, static_cast<std::uint8_t>(~pat)));
      CHECK(chip.row_state(0, 0, row_a).last_restore == plan.closing_pre_offset);
    }
  }
}
