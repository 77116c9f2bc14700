#include <cmath>
#include <sstream>

#include "doctest.h"
#include "hira/event_log.hpp"
#include "hira/scheduler.hpp"

using namespace hira;

namespace {

Geometry desk_geom(std::int64_t banks = 1, std::int64_t subarrays = 8,
                   std::int64_t rows = 4) {
  Geometry g;
  g.banks_per_rank = banks;
  g.subarrays_per_bank = subarrays;
  g.rows_per_subarray = rows;
  g.columns_per_row = 64;
  return g;
}

// Shrunk refresh cadence for desk-scale windows; ratios preserved by scaling
// tREFI and tRFC along with tREFW.
TimingParams desk_timing(picoseconds t_refw) {
  TimingParams tp;
  tp.tREFW = t_refw;
  tp.tREFI = std::max<picoseconds>(t_refw / 8, 2);
  tp.tRFC = std::max<picoseconds>(tp.tREFI / 2, 1);
  return tp;
}

DramChip desk_chip(const Geometry& g, const TimingParams& tp,
                   picoseconds retention_grace = 0,
                   std::uint64_t n_rh = 1ULL << 40) {
  GroundTruthConfig gt;
  gt.n_rh_true = n_rh;
  gt.retention_grace = retention_grace;
  return DramChip(g, tp,
                  IsolationMap::adjacent_share(
                      static_cast<std::int32_t>(g.subarrays_per_bank)),
                  ElectricalWindows{}, gt);
}

DramAddress row_addr(const Geometry& g, BankId bank, RowId bank_row,
                     ColumnId col = 0) {
  DramAddress a;
  a.bank = bank;
  a.subarray = g.subarray_of(bank_row);
  a.row_in_subarray = g.row_within_subarray(bank_row);
  a.column = col;
  return a;
}

}  // namespace

TEST_CASE("periodic generation arithmetic is exact") {
  const picoseconds W = 64000000000;  // 64 ms
  const std::int64_t R = 65536;
  const std::int64_t B = 16;

  // Exactly R requests per bank per window; instants stay inside the window.
  CHECK(periodic_generation_time(W, R, B, 0, 0) == 0);
  CHECK(periodic_generation_time(W, R, B, 0, R) == W);
  CHECK(periodic_generation_time(W, R, B, 0, R - 1) < W);

  // Mean per-bank period is exactly 976.5625 ns; every gap is its floor or
  // ceiling.
  picoseconds prev = 0, min_gap = W, max_gap = 0;
  for (std::int64_t k = 1; k <= 4096; ++k) {
    const picoseconds t = periodic_generation_time(W, R, B, 5, k);
    const picoseconds gap = t - prev;
    prev = t;
    if (k > 1) {
      min_gap = std::min(min_gap, gap);
      max_gap = std::max(max_gap, gap);
    }
  }
  CHECK(min_gap == 976562);
  CHECK(max_gap == 976563);

  // Inter-bank offset ~ 61.035 ns (floor/ceiling of 61035.15625).
  const picoseconds off =
      periodic_generation_time(W, R, B, 1, 0) - periodic_generation_time(W, R, B, 0, 0);
  CHECK(off == 61035);

  // Degenerate geometry: one row, one bank -> one request per window at 0.
  CHECK(periodic_generation_time(W, 1, 1, 0, 0) == 0);
  CHECK(periodic_generation_time(W, 1, 1, 0, 1) == W);
}

TEST_CASE("idle hira scheduler refreshes every row by deadline") {
  const Geometry g = desk_geom(1, 8, 2);  // 16 rows
  const TimingParams tp = desk_timing(16000000);  // 16 us window, 1 us period
  DramChip chip = desk_chip(g, tp, tp.tREFW);
  SchedulerConfig cfg;
  cfg.mode = SchedulerMode::Hira;
  cfg.slack_multiple = 4;
  Controller ctl(chip, cfg, nullptr);

  ctl.run_until(tp.tREFW - 1);  // [0, tREFW)
  CHECK(ctl.stats().periodic_generated == 16);
  CHECK(ctl.stats().deadline_violations == 0);
  // Entries arrive one period apart, so none finds a same-bank partner; all
  // are performed standalone at their deadlines.
  CHECK(ctl.stats().hira_rr == 0);
  CHECK(ctl.stats().standalone_refreshes == 16);
  std::int64_t restored = 0;
  for (RowId r = 0; r < g.rows_per_bank(); ++r)
    if (chip.row_state(0, 0, r).last_restore > 0) ++restored;
  CHECK(restored == 16);
  CHECK(chip.stats().corrupted_rows == 0);
  CHECK(chip.stats().tfaw_violations == 0);
}

TEST_CASE("near-deadline entries pair into refresh-refresh operations") {
  const Geometry g = desk_geom(1, 8, 2);
  // 100 ns period stacks several live entries per bank.
  TimingParams tp = desk_timing(1600000);
  tp.tREFI = 200000;
  tp.tRFC = 100000;
  DramChip chip = desk_chip(g, tp, 10 * tp.tREFW);
  SchedulerConfig cfg;
  cfg.mode = SchedulerMode::Hira;
  cfg.slack_multiple = 4;
  std::ostringstream log_text;
  EventLog log(&log_text);
  Controller ctl(chip, cfg, &log);

  ctl.run_until(tp.tREFW);
  CHECK(ctl.stats().deadline_violations == 0);
  // All sixteen periodic requests pair up two at a time.
  CHECK(ctl.stats().hira_rr == 8);
  CHECK(ctl.stats().standalone_refreshes == 0);
  // The first pair: subarray 0 (least refreshed, lowest index) with the
  // least-refreshed subarray isolated from it (subarray 2), base rows 0 and 4.
  CHECK(log_text.str().find("HIRA_RR,0,0,4,periodic") != std::string::npos);
}

TEST_CASE("no partner in an isolation-free map falls back to standalone") {
  const Geometry g = desk_geom(1, 2, 2);  // two adjacent subarrays only
  TimingParams tp = desk_timing(1600000);
  tp.tREFI = 200000;
  tp.tRFC = 100000;
  DramChip chip(g, tp, IsolationMap::adjacent_share(2), ElectricalWindows{},
                GroundTruthConfig{1ULL << 40, 10 * tp.tREFW});
  SchedulerConfig cfg;
  cfg.mode = SchedulerMode::Hira;
  cfg.slack_multiple = 4;
  Controller ctl(chip, cfg, nullptr);
  ctl.run_until(tp.tREFW);
  CHECK(ctl.stats().hira_rr == 0);
  CHECK(ctl.stats().standalone_refreshes == 4);
  CHECK(ctl.stats().deadline_violations == 0);
}

TEST_CASE("demand PRE triggers refresh-access pairing (case 1)") {
  const Geometry g = desk_geom(1, 8, 4);  // 32 rows
  const TimingParams tp = TimingParams::ddr4();
  DramChip chip = desk_chip(g, tp, tp.tREFW);
  SchedulerConfig cfg;
  cfg.mode = SchedulerMode::Hira;
  cfg.slack_multiple = 2;
  std::ostringstream log_text;
  EventLog log(&log_text);
  Controller ctl(chip, cfg, &log);

  // Demand 1 opens subarray 5 row 0 (bank row 20); demand 2 conflicts within
  // subarray 5, so its activation rides a HiRA pair whose first ACT refreshes
  // the least-refreshed subarray isolated from subarray 5 (lowest index: 0).
  ctl.add_request(0, false, row_addr(g, 0, 20), 0);
  ctl.add_request(0, false, row_addr(g, 0, 21), 0);
  ctl.run_to_drain(1000000);
  // Let the dual-open bank close (the restore lands at the closing PRE).
  ctl.run_until(ctl.now() + 200000);

  CHECK(ctl.stats().hira_ra == 1);
  CHECK(log_text.str().find("46250,HIRA_RA,0,0,21,periodic") != std::string::npos);
  // The refreshed row is restored once the dual-open bank closes.
  CHECK(ctl.stats().deadline_violations == 0);
  CHECK(chip.stats().corrupted_rows == 0);
  CHECK(chip.row_state(0, 0, 0).last_restore > 0);
}

TEST_CASE("preventive head blocked by adjacency, later demand pairs it") {
  const Geometry g = desk_geom(1, 8, 4);
  const TimingParams tp = TimingParams::ddr4();
  DramChip chip = desk_chip(g, tp, tp.tREFW);
  SchedulerConfig cfg;
  cfg.mode = SchedulerMode::Hira;
  cfg.slack_multiple = 8;  // keep the preventive entry alive across demands
  cfg.para_enabled = true;
  cfg.p_th = 1.0;  // every demand activation queues a preventive
  std::ostringstream log_text;
  EventLog log(&log_text);
  Controller ctl(chip, cfg, &log);

  // Demand 1: subarray 0 row 2 -> queues a preventive for a subarray-0 victim.
  // A periodic request for bank 0 also exists from t = 0.
  ctl.add_request(0, false, row_addr(g, 0, 2), 0);
  // Demand 2: subarray 1 (adjacent to 0): the preventive head cannot pair, so
  // the scan continues to the periodic entry, whose balanced pick lands on
  // subarray 3 (lowest index isolated from 1).
  ctl.add_request(0, false, row_addr(g, 0, 6), 0);
  // Demand 3: subarray 4, isolated from 0: the preventive head pairs here.
  ctl.add_request(0, false, row_addr(g, 0, 17), 0);
  ctl.run_to_drain(10000000);

  const std::string text = log_text.str();
  CHECK(text.find("HIRA_RA,0,12,6,periodic") != std::string::npos);
  const bool paired_low = text.find("HIRA_RA,0,1,17,preventive") != std::string::npos;
  const bool paired_high = text.find("HIRA_RA,0,3,17,preventive") != std::string::npos;
  CHECK((paired_low || paired_high));
  CHECK(ctl.stats().deadline_violations == 0);
}

TEST_CASE("row hits are served before conflicting requests") {
  const Geometry g = desk_geom(1, 8, 4);
  DramChip chip = desk_chip(g, TimingParams::ddr4(), 0);
  SchedulerConfig cfg;
  cfg.mode = SchedulerMode::NoRefresh;
  std::ostringstream log_text;
  EventLog log(&log_text);
  Controller ctl(chip, cfg, &log);

  ctl.add_request(0, false, row_addr(g, 0, 4, 1), 0);
  ctl.add_request(0, false, row_addr(g, 0, 8, 0), 0);  // conflict, older than hit 2
  ctl.add_request(0, false, row_addr(g, 0, 4, 2), 0);  // hit
  ctl.run_to_drain(1000000);

  const std::string text = log_text.str();
  const auto first_rd = text.find("RD");
  const auto second_rd = text.find("RD", first_rd + 1);
  const auto pre = text.find("PRE");
  REQUIRE(second_rd != std::string::npos);
  REQUIRE(pre != std::string::npos);
  CHECK(second_rd < pre);  // both hits served before the conflict's precharge
  CHECK(ctl.stats().served == 3);
}

TEST_CASE("baseline mode issues REF every tREFI and pauses demand") {
  const Geometry g = desk_geom(2, 8, 4);
  TimingParams tp = desk_timing(16000000);  // tREFI = 2 us, tRFC = 1 us
  DramChip chip = desk_chip(g, tp, tp.tREFW);
  SchedulerConfig cfg;
  cfg.mode = SchedulerMode::BaselineRef;
  std::ostringstream log_text;
  EventLog log(&log_text);
  Controller ctl(chip, cfg, &log);

  // A request arriving just after the tREFI boundary waits out tRFC.
  ctl.add_request(0, false, row_addr(g, 0, 0), tp.tREFI + 1000);
  ctl.run_until(3 * tp.tREFI + tp.tREFI / 2);
  CHECK(ctl.stats().refs == 3);
  CHECK(ctl.stats().served == 1);
  // Served at or after the rank unblocked.
  const std::string text = log_text.str();
  const auto rd_pos = text.find("RD");
  REQUIRE(rd_pos != std::string::npos);
  const auto line_start = text.rfind('\n', rd_pos) + 1;
  const picoseconds rd_time =
      std::stoll(text.substr(line_start, text.find(',', line_start) - line_start));
  CHECK(rd_time >= tp.tREFI + tp.tRFC);
}

TEST_CASE("para sampling statistics match the binomial oracle") {
  const Geometry g = desk_geom(1, 8, 64);  // 512 rows
  const TimingParams tp = TimingParams::ddr4();

  SUBCASE("p_th = 1 generates exactly one preventive per demand activation") {
    DramChip chip = desk_chip(g, tp, tp.tREFW);
    SchedulerConfig cfg;
    cfg.mode = SchedulerMode::Hira;
    cfg.para_enabled = true;
    cfg.p_th = 1.0;
    cfg.queue_depth = 1;  // closed-loop source
    std::ostringstream log_text;
    EventLog log(&log_text);
    Controller ctl(chip, cfg, &log);
    for (int i = 0; i < 2000; ++i)
      ctl.add_request(0, false, row_addr(g, 0, 100 + (i % 2) * 2),
                      static_cast<picoseconds>(i) * 100);
    ctl.run_to_drain(1000000000);
    // Sampling is per demand activation: plain ACTs plus the second ACT of
    // every refresh-access pair (a preempted dual-open row may activate its
    // demand row a second time; that activation samples again).
    const std::int64_t demand_acts =
        log.count(EventKind::Act) + log.count(EventKind::HiraRa);
    CHECK(ctl.stats().preventive_generated == demand_acts);
    CHECK(demand_acts >= 2000);
    CHECK(ctl.stats().deadline_violations == 0);
  }

  SUBCASE("p_th = 0 never generates preventives") {
    DramChip chip = desk_chip(g, tp, tp.tREFW);
    SchedulerConfig cfg;
    cfg.mode = SchedulerMode::Hira;
    cfg.para_enabled = true;
    cfg.p_th = 0.0;
    cfg.queue_depth = 1;
    Controller ctl(chip, cfg, nullptr);
    for (int i = 0; i < 2000; ++i)
      ctl.add_request(0, false, row_addr(g, 0, 100 + (i % 2) * 2),
                      static_cast<picoseconds>(i) * 100);
    ctl.run_to_drain(1000000000);
    CHECK(ctl.stats().preventive_generated == 0);
  }

  SUBCASE("p_th = 0.5 total volume within three sigma over a million draws") {
    DramChip chip = desk_chip(g, tp, 1000 * tp.tREFW);
    SchedulerConfig cfg;
    cfg.mode = SchedulerMode::Hira;
    cfg.para_enabled = true;
    cfg.p_th = 0.5;
    cfg.rng_seed = 12345;
    cfg.queue_depth = 1;
    Controller ctl(chip, cfg, nullptr);
    const std::int64_t n = 1000000;
    for (std::int64_t i = 0; i < n; ++i)
      ctl.add_request(0, false, row_addr(g, 0, 100 + (i % 2) * 2),
                      static_cast<picoseconds>(i) * 93);
    ctl.run_to_drain(tp.tREFW * 1000);
    const double sigma = std::sqrt(n * 0.5 * 0.5);
    CHECK(std::abs(static_cast<double>(ctl.stats().preventive_generated) -
                   n * 0.5) <= 3.0 * sigma);
  }

  SUBCASE("per-neighbor split within three sigma") {
    DramChip chip = desk_chip(g, tp, 1000 * tp.tREFW);
    SchedulerConfig cfg;
    cfg.mode = SchedulerMode::Hira;
    cfg.para_enabled = true;
    cfg.p_th = 0.5;
    cfg.rng_seed = 777;
    cfg.queue_depth = 1;
    std::ostringstream log_text;
    EventLog log(&log_text);
    Controller ctl(chip, cfg, &log);
    const std::int64_t n = 100000;
    const RowId left_aggr = 100, right_aggr = 102;  // victim 101 between them
    for (std::int64_t i = 0; i < n; ++i)
      ctl.add_request(0, false,
                      row_addr(g, 0, (i % 2 == 0) ? left_aggr : right_aggr),
                      static_cast<picoseconds>(i) * 93);
    ctl.run_to_drain(tp.tREFW * 1000);

    // Victims: 99 and 101 from the left aggressor, 101 and 103 from the
    // right; the shared victim 101 sees p_th/2 of all n draws.
    std::int64_t count_victim = 0;
    std::istringstream lines(log_text.str());
    std::string line;
    while (std::getline(lines, line)) {
      if (line.find("preventive") == std::string::npos) continue;
      // rowA column of refresh events names the refreshed victim.
      std::size_t comma = 0;
      int field = 0;
      std::string row_a;
      std::stringstream fs(line);
      std::string tok;
      while (std::getline(fs, tok, ',')) {
        if (field == 3) row_a = tok;
        ++field;
      }
      (void)comma;
      if (row_a == "101") ++count_victim;
    }
    const double expect = n * 0.25;
    const double sigma = std::sqrt(n * 0.25 * 0.75);
    CHECK(std::abs(static_cast<double>(count_victim) - expect) <= 3.0 * sigma);
  }
}

TEST_CASE("pr-fifo back-pressure completes without overflow") {
  const Geometry g = desk_geom(1, 8, 64);
  const TimingParams tp = TimingParams::ddr4();
  DramChip chip = desk_chip(g, tp, tp.tREFW);
  SchedulerConfig cfg;
  cfg.mode = SchedulerMode::Hira;
  cfg.para_enabled = true;
  cfg.p_th = 1.0;
  cfg.slack_multiple = 8;
  cfg.queue_depth = 1;
  Controller ctl(chip, cfg, nullptr);
  for (int i = 0; i < 5000; ++i)
    ctl.add_request(0, false, row_addr(g, 0, 100 + (i % 2) * 2), 0);
  CHECK_NOTHROW(ctl.run_to_drain(10000000000));
  CHECK(ctl.stats().preventive_generated == 5000);
  CHECK(ctl.stats().deadline_violations == 0);
  CHECK(ctl.demand_drained());
}

TEST_CASE("faulted subarray pairs table causes detectable corruption") {
  const Geometry g = desk_geom(1, 4, 4);
  const TimingParams tp = TimingParams::ddr4();
  DramChip chip(g, tp, IsolationMap::adjacent_share(4), ElectricalWindows{},
                GroundTruthConfig{1ULL << 40, tp.tREFW});
  SchedulerConfig cfg;
  cfg.mode = SchedulerMode::Hira;
  cfg.slack_multiple = 2;
  Controller ctl(chip, cfg, nullptr);
  // The controller now believes subarrays 0 and 1 are isolated.
  ctl.spt().inject_false_isolation(0, 1);

  // Demand conflict in subarray 1 pairs with a periodic refresh that the
  // faulted table maps to subarray 0.
  ctl.add_request(0, false, row_addr(g, 0, 4), 0);
  ctl.add_request(0, false, row_addr(g, 0, 5), 0);
  ctl.run_to_drain(100000000);
  CHECK(chip.stats().corrupted_rows > 0);
}

TEST_CASE("scheduler event logs are deterministic per seed") {
  const Geometry g = desk_geom(2, 8, 8);
  const TimingParams tp = desk_timing(8000000);
  auto run = [&](std::uint64_t seed) {
    DramChip chip = desk_chip(g, tp, tp.tREFW);
    SchedulerConfig cfg;
    cfg.mode = SchedulerMode::Hira;
    cfg.para_enabled = true;
    cfg.p_th = 0.3;
    cfg.rng_seed = seed;
    std::ostringstream log_text;
    EventLog log(&log_text);
    Controller ctl(chip, cfg, &log);
    for (int i = 0; i < 500; ++i)
      ctl.add_request(i % 2, false, row_addr(g, i % 2, (i * 7) % 64),
                      static_cast<picoseconds>(i) * 2000);
    ctl.run_until(tp.tREFW);
    return log_text.str();
  };
  CHECK(run(5) == run(5));
  CHECK(run(5) != run(6));
}

TEST_CASE("controller rejects timing configs outside the electrical windows") {
  const Geometry g = desk_geom();
  DramChip chip = desk_chip(g, TimingParams::ddr4());
  SchedulerConfig cfg;
  cfg.hira_t1 = 1500;  // below the sense-amplifier enable window
  CHECK_THROWS(Controller(chip, cfg, nullptr));
  cfg.hira_t1 = 3000;
  cfg.hira_t2 = 6000;  // beyond the wordline-disable window
  CHECK_THROWS(Controller(chip, cfg, nullptr));
}
