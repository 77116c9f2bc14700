#include "hira/characterization.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hira {

BoxStats box_stats(std::vector<double> values) {
  BoxStats b;
  if (values.empty()) return b;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  auto median_of = [&](std::size_t lo, std::size_t hi) {  // [lo, hi)
    const std::size_t len = hi - lo;
    const std::size_t mid = lo + len / 2;
    return (len % 2 == 1) ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  };
  b.min = values.front();
  b.max = values.back();
  b.median = median_of(0, n);
  b.q1 = median_of(0, n / 2);
  b.q3 = median_of(n % 2 == 0 ? n / 2 : n / 2 + 1, n);
  return b;
}

const std::vector<std::uint8_t>& default_patterns() {
  static const std::vector<std::uint8_t> p = {0xFF, 0x00, 0xAA, 0x55};
  return p;
}

std::vector<RowId> default_tested_rows(const Geometry& geom,
                                       std::int64_t block) {
  const std::int64_t rows = geom.rows_per_bank();
  std::vector<RowId> out;
  if (rows <= 3 * block) {
    out.reserve(static_cast<std::size_t>(rows));
    for (RowId r = 0; r < rows; ++r) out.push_back(r);
    return out;
  }
  auto add_range = [&](RowId lo, RowId hi) {
    for (RowId r = lo; r < hi; ++r) out.push_back(r);
  };
  add_range(0, block);
  const RowId mid = rows / 2 - block / 2;
  add_range(mid, mid + block);
  add_range(rows - block, rows);
  return out;
}

bool coverage_sets_identical(const std::vector<CoverageReport>& reports) {
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].tested_rows != reports[0].tested_rows) return false;
    if (reports[i].coverage != reports[0].coverage) return false;
  }
  return true;
}

bool CharacterizationHarness::hira_pair_passes(
    const HiraConfig& cfg, RankId rank, BankId bank, RowId row_a, RowId row_b,
    const std::vector<std::uint8_t>& patterns) {
  const TimingParams& tp = chip_->timing();
  bool success = true;
  for (std::uint8_t pattern : patterns) {
    const std::uint8_t inverse = static_cast<std::uint8_t>(~pattern);
    chip_->poke_row(rank, bank, row_a, pattern, now_);
    chip_->poke_row(rank, bank, row_b, inverse, now_);

    auto must = [&](const CommandResult& r) {
      if (!r.accepted)
        throw std::logic_error("characterization command rejected: " +
                               r.violation);
    };
    must(chip_->issue(rank, bank, Command::act(row_a), now_));
    must(chip_->issue(rank, bank, Command::pre(), now_ + cfg.t1, true));
    must(chip_->issue(rank, bank, Command::act(row_b), now_ + cfg.t1 + cfg.t2,
                      true));
    // Close both rows. With an ignored second ACT the bank is already
    // precharged and the PRE is a no-op.
    must(chip_->issue(rank, bank, Command::pre(),
                      now_ + cfg.t1 + cfg.t2 + tp.tRAS));
    now_ += cfg.t1 + cfg.t2 + tp.tRAS + tp.tRP;

    const bool a_pass = chip_->compare_row(rank, bank, row_a, pattern);
    const bool b_pass = chip_->compare_row(rank, bank, row_b, inverse);
    if (!(a_pass && b_pass)) success = false;
  }
  return success;
}

CoverageReport CharacterizationHarness::run_coverage(
    const HiraConfig& cfg, RankId rank, BankId bank,
    const std::vector<RowId>& tested_rows,
    const std::vector<std::uint8_t>& patterns) {
  CoverageReport report;
  report.t1 = cfg.t1;
  report.t2 = cfg.t2;
  report.patterns = patterns;
  report.tested_rows = tested_rows;
  report.coverage.reserve(tested_rows.size());

  for (RowId row_a : tested_rows) {
    std::int64_t row_count = 0;
    for (RowId row_b : tested_rows)
      if (hira_pair_passes(cfg, rank, bank, row_a, row_b, patterns))
        ++row_count;
    report.coverage.push_back(static_cast<double>(row_count) /
                              static_cast<double>(tested_rows.size()));
  }
  return report;
}

RowId CharacterizationHarness::pick_isolated_dummy(BankId, RowId victim) const {
  const Geometry& g = chip_->geometry();
  const SubarrayId vsa = g.subarray_of(victim);
  for (SubarrayId sa : chip_->isolation().partners(vsa))
    return g.bank_row(sa, 0);
  throw std::runtime_error("no subarray isolated from the victim's");
}

bool CharacterizationHarness::threshold_probe(RankId rank, BankId bank,
                                              RowId victim, RowId dummy,
                                              std::int64_t total_hammers,
                                              const ThresholdOptions& opt,
                                              bool with_hira,
                                              bool& corruption) {
  const TimingParams& tp = chip_->timing();
  const RowId aggr_a = victim - 1;
  const RowId aggr_b = victim + 1;
  const std::uint8_t pattern = opt.pattern;
  const std::uint8_t inverse = static_cast<std::uint8_t>(~pattern);

  chip_->poke_row(rank, bank, victim, pattern, now_);
  chip_->poke_row(rank, bank, dummy, inverse, now_);
  chip_->poke_row(rank, bank, aggr_a, inverse, now_);
  chip_->poke_row(rank, bank, aggr_b, inverse, now_);

  auto must = [&](const CommandResult& r) {
    if (!r.accepted)
      throw std::logic_error("threshold command rejected: " + r.violation);
  };
  auto hammer = [&](std::int64_t count) {
    for (std::int64_t i = 0; i < count; ++i) {
      const RowId aggr = (i % 2 == 0) ? aggr_a : aggr_b;
      must(chip_->issue(rank, bank, Command::act(aggr), now_));
      must(chip_->issue(rank, bank, Command::pre(), now_ + tp.tRAS));
      now_ += tp.tRC;
    }
  };

  const std::int64_t half = total_hammers / 2;
  hammer(half);

  const picoseconds mid_cost =
      opt.hira.t1 + opt.hira.t2 + tp.tRAS + tp.tRP;
  if (with_hira) {
    must(chip_->issue(rank, bank, Command::act(dummy), now_));
    must(chip_->issue(rank, bank, Command::pre(), now_ + opt.hira.t1, true));
    const CommandResult second = chip_->issue(
        rank, bank, Command::act(victim), now_ + opt.hira.t1 + opt.hira.t2,
        true);
    must(second);
    must(chip_->issue(rank, bank, Command::pre(),
                      now_ + opt.hira.t1 + opt.hira.t2 + tp.tRAS));
    now_ += mid_cost;
    if (second.hira != HiraOutcome::DualOpen) {
      corruption = chip_->row_state(rank, bank, victim).corrupted() ||
                   chip_->row_state(rank, bank, dummy).corrupted();
      return false;
    }
  } else {
    now_ += mid_cost;  // wait exactly as long as the HiRA step would take
  }

  hammer(total_hammers - half);

  const RowState& v = chip_->row_state(rank, bank, victim);
  return v.bit_flipped() || v.pattern != pattern;
}

CharacterizationHarness::ThresholdOutcome CharacterizationHarness::run_threshold(
    RankId rank, BankId bank, RowId victim, const ThresholdOptions& opt) {
  const Geometry& g = chip_->geometry();
  if (victim <= 0 || victim + 1 >= g.rows_per_bank() ||
      g.subarray_of(victim - 1) != g.subarray_of(victim) ||
      g.subarray_of(victim + 1) != g.subarray_of(victim))
    throw std::invalid_argument(
        "victim needs both physical neighbors within its subarray");

  const RowId dummy =
      opt.dummy ? *opt.dummy : pick_isolated_dummy(bank, victim);

  ThresholdOutcome out;
  const std::int64_t n_rh =
      static_cast<std::int64_t>(chip_->ground_truth_config().n_rh_true);
  std::int64_t hi = opt.search_limit_multiplier * n_rh;
  if (hi % 2 != 0) ++hi;

  bool corruption = false;
  if (!threshold_probe(rank, bank, victim, dummy, hi, opt, opt.use_hira,
                       corruption)) {
    if (corruption) {
      out.corruption = true;
      out.report = "HiRA mid-test step corrupted a row; dummy subarray is "
                   "not isolated from the victim's";
      return out;
    }
    out.flipped = false;
    out.report = "no bit flip up to the search bound";
    return out;
  }

  // Smallest even hammer count that still flips.
  std::int64_t lo = 0;  // known not to flip (zero hammers)
  while (hi - lo > 2) {
    std::int64_t mid = (lo + hi) / 2;
    mid -= mid % 2;
    if (mid <= lo) mid = lo + 2;
    if (threshold_probe(rank, bank, victim, dummy, mid, opt, opt.use_hira,
                        corruption))
      hi = mid;
    else
      lo = mid;
    if (corruption) {
      out.corruption = true;
      out.report = "HiRA mid-test step corrupted a row";
      return out;
    }
  }
  out.flipped = true;
  out.threshold = hi;
  return out;
}

BankVariationReport CharacterizationHarness::run_bank_variation(
    const HiraConfig& cfg, RankId rank, const std::vector<RowId>& tested_rows,
    const std::vector<RowId>& victims) {
  BankVariationReport report;
  for (BankId b = 0; b < chip_->geometry().banks_per_rank; ++b) {
    report.coverage_per_bank.push_back(
        run_coverage(cfg, rank, b, tested_rows, default_patterns()));
    ThresholdReport tr;
    for (RowId victim : victims) {
      ThresholdOptions with;
      with.use_hira = true;
      with.hira = cfg;
      ThresholdOptions without = with;
      without.use_hira = false;
      const auto w = run_threshold(rank, b, victim, with);
      const auto wo = run_threshold(rank, b, victim, without);
      ThresholdMeasurement m;
      m.victim = victim;
      m.with_hira = w.threshold;
      m.without_hira = wo.threshold;
      m.ratio = wo.threshold > 0 ? static_cast<double>(w.threshold) /
                                       static_cast<double>(wo.threshold)
                                 : 0.0;
      tr.measurements.push_back(m);
    }
    report.threshold_per_bank.push_back(std::move(tr));
  }
  report.coverage_identical = coverage_sets_identical(report.coverage_per_bank);
  return report;
}

double coverage_oracle(const IsolationMap& map, const Geometry& geom,
                       const ElectricalWindows& windows, const HiraConfig& cfg,
                       RowId row_a, const std::vector<RowId>& tested_rows) {
  const bool windows_ok = cfg.t1 >= windows.sense_enable_min &&
                          cfg.t2 <= windows.wordline_disable_max;
  if (!windows_ok) return 0.0;
  std::int64_t passing = 0;
  for (RowId row_b : tested_rows)
    if (map.isolated(geom.subarray_of(row_a), geom.subarray_of(row_b)))
      ++passing;
  return static_cast<double>(passing) /
         static_cast<double>(tested_rows.size());
}

void write_coverage_csv(const CoverageReport& report, std::ostream& out) {
  out << "# hira coverage v1 t1_ps=" << report.t1 << " t2_ps=" << report.t2
      << "\n";
  out << "rowA,coverage\n";
  for (std::size_t i = 0; i < report.tested_rows.size(); ++i)
    out << report.tested_rows[i] << ',' << report.coverage[i] << '\n';
}

void write_threshold_csv(const ThresholdReport& report, std::ostream& out) {
  out << "# hira threshold v1\n";
  out << "victim,hc_without,hc_with,ratio\n";
  for (const auto& m : report.measurements)
    out << m.victim << ',' << m.without_hira << ',' << m.with_hira << ','
        << m.ratio << '\n';
}

void write_box_summary_csv(const std::vector<CoverageReport>& reports,
                           std::ostream& out) {
  out << "# hira coverage-box v1\n";
  out << "t1_ps,t2_ps,min,q1,median,q3,max\n";
  for (const auto& r : reports) {
    const BoxStats b = r.box();
    out << r.t1 << ',' << r.t2 << ',' << b.min << ',' << b.q1 << ','
        << b.median << ',' << b.q3 << ',' << b.max << '\n';
  }
}

}  // namespace hira
