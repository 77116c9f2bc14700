#pragma once

#include <string>
#include <vector>

#include "hira/dram_core.hpp"
#include "hira/geometry.hpp"
#include "hira/isolation_map.hpp"
#include "hira/timing.hpp"
#include "hira/types.hpp"

namespace hira {

enum class HiraPurpose { RefreshRefresh, RefreshAccess };

// The two engineered sub-nominal delays of a HiRA sequence: t1 (first ACT to
// PRE) and t2 (PRE to second ACT).
struct HiraConfig {
  picoseconds t1 = 3000;
  picoseconds t2 = 3000;
  HiraPurpose purpose = HiraPurpose::RefreshRefresh;

  void validate(const TimingParams& tp) const;
};

// Command schedule of one HiRA operation, offsets from the first ACT.
struct HiraPlan {
  RowId first_row = -1;   // refreshed row
  RowId second_row = -1;  // refreshed (refresh-refresh) or accessed row
  picoseconds pre_offset = 0;         // t1
  picoseconds second_act_offset = 0;  // t1 + t2
  picoseconds column_ready_offset = 0;   // t1 + t2 + tRCD
  picoseconds closing_pre_offset = 0;    // earliest close: t1 + t2 + tRAS

  static HiraPlan make(const HiraConfig& cfg, const TimingParams& tp,
                       RowId first_row, RowId second_row);
};

// The four operating conditions of a HiRA operation, returned in full rather
// than first-failure so characterization reports can show every violation:
//   1. t1 >= sense_enable_min (sense amplifiers enabled before the PRE)
//   2. t2 <= wordline_disable_max (second ACT interrupts the precharge in time)
//   3. t2 >= bankio_disconnect_min for refresh-access (bank I/O handed over;
//      does not apply to refresh-refresh, which never uses the bank I/O)
//   4. the two rows sit in isolated subarrays
enum class HiraCondition {
  SenseAmpEnable = 1,
  WordlineStillUp = 2,
  BankIoDisconnect = 3,
  IsolatedSubarrays = 4,
};

std::string to_string(HiraCondition c);

struct HiraValidation {
  std::vector<HiraCondition> violated;
  bool ok() const { return violated.empty(); }
};

// Rows must be in the same bank; callers pass bank-local row ids.
HiraValidation validate_hira(const HiraConfig& cfg, const IsolationMap& map,
                             const Geometry& geom, RowId row_a, RowId row_b,
                             const ElectricalWindows& windows);

// Latency of refreshing two rows with one HiRA operation: t1 + t2 + tRAS.
// The closing PRE's tRP is excluded on both sides of the comparison.
picoseconds two_row_refresh_latency(const HiraConfig& cfg,
                                    const TimingParams& tp);

// Nominal-timing cost of two back-to-back single-row refreshes:
// tRAS + tRP + tRAS.
picoseconds baseline_two_row_refresh_latency(const TimingParams& tp);

// 1 - hira / baseline.
double latency_reduction(const HiraConfig& cfg, const TimingParams& tp);

}  // namespace hira
