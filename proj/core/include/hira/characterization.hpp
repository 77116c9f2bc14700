#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hira/dram_core.hpp"
#include "hira/hira_op.hpp"

namespace hira {

struct BoxStats {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

BoxStats box_stats(std::vector<double> values);

// Coverage of one timing configuration: per tested first-row, the fraction of
// tested partner rows that pass the initialize / HiRA / read-back check for
// all data patterns.
struct CoverageReport {
  picoseconds t1 = 0;
  picoseconds t2 = 0;
  std::vector<std::uint8_t> patterns;
  std::vector<RowId> tested_rows;
  std::vector<double> coverage;  // aligned with tested_rows

  BoxStats box() const { return box_stats(coverage); }
};

struct ThresholdMeasurement {
  RowId victim = -1;
  std::int64_t without_hira = 0;
  std::int64_t with_hira = 0;
  double ratio = 0.0;
};

struct ThresholdReport {
  std::vector<ThresholdMeasurement> measurements;
};

struct BankVariationReport {
  std::vector<CoverageReport> coverage_per_bank;
  std::vector<ThresholdReport> threshold_per_bank;
  bool coverage_identical = false;
};

// The four data patterns used by the read-back tests; the partner row is
// always initialized with the bitwise inverse.
const std::vector<std::uint8_t>& default_patterns();

// Full-scale sampling tests the first, last, and middle `block` rows of a
// bank; small banks fall back to every row.
std::vector<RowId> default_tested_rows(const Geometry& geom,
                                       std::int64_t block = 2048);

bool coverage_sets_identical(const std::vector<CoverageReport>& reports);

// Drives a DramChip through the characterization experiments with a
// monotonically advancing command clock.
class CharacterizationHarness {
 public:
  explicit CharacterizationHarness(DramChip& chip) : chip_(&chip) {}

  // For every (row_a, row_b, pattern) triple: initialize the rows with
  // inverse patterns, run ACT(a) -t1- PRE -t2- ACT(b) -tRAS- PRE, read back
  // and compare. row_b counts toward row_a's coverage when every pattern
  // passes.
  CoverageReport run_coverage(const HiraConfig& cfg, RankId rank, BankId bank,
                              const std::vector<RowId>& tested_rows,
                              const std::vector<std::uint8_t>& patterns);

  // Minimal total hammer count (even, binary search, granularity of one
  // probe step) at which the victim flips. Half the hammers land before the
  // mid-test step, half after; the mid-test step either refreshes the victim
  // with a HiRA second activation or waits the same amount of time.
  struct ThresholdOptions {
    bool use_hira = true;
    HiraConfig hira{};          // purpose RefreshRefresh
    std::optional<RowId> dummy; // default: first row in an isolated subarray
    std::int64_t search_limit_multiplier = 4;  // bound = mult * n_rh_true
    std::uint8_t pattern = 0xFF;
  };

  struct ThresholdOutcome {
    std::int64_t threshold = 0;
    bool flipped = false;       // false: no flip up to the search bound
    bool corruption = false;    // HiRA corrupted a row; run aborted
    std::string report;
  };

  ThresholdOutcome run_threshold(RankId rank, BankId bank, RowId victim,
                                 const ThresholdOptions& opt);

  // Both experiments per bank; coverage sets are compared across banks.
  BankVariationReport run_bank_variation(const HiraConfig& cfg, RankId rank,
                                         const std::vector<RowId>& tested_rows,
                                         const std::vector<RowId>& victims);

  picoseconds now() const { return now_; }

 private:
  bool hira_pair_passes(const HiraConfig& cfg, RankId rank, BankId bank,
                        RowId row_a, RowId row_b,
                        const std::vector<std::uint8_t>& patterns);
  bool threshold_probe(RankId rank, BankId bank, RowId victim, RowId dummy,
                       std::int64_t total_hammers, const ThresholdOptions& opt,
                       bool with_hira, bool& corruption);
  RowId pick_isolated_dummy(BankId bank, RowId victim) const;

  DramChip* chip_;
  picoseconds now_ = 0;
};

// Exhaustive-enumeration oracle for coverage: a partner passes iff the
// electrical windows accept (t1, t2) and the subarray pair is isolated.
// Independent of the command-driven path above.
double coverage_oracle(const IsolationMap& map, const Geometry& geom,
                       const ElectricalWindows& windows, const HiraConfig& cfg,
                       RowId row_a, const std::vector<RowId>& tested_rows);

// CSV emitters: "rowA,coverage", "victim,hc_without,hc_with,ratio", and the
// five-number box summary per (t1, t2).
void write_coverage_csv(const CoverageReport& report, std::ostream& out);
void write_threshold_csv(const ThresholdReport& report, std::ostream& out);
void write_box_summary_csv(const std::vector<CoverageReport>& reports,
                           std::ostream& out);

}  // namespace hira
