#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "hira/geometry.hpp"
#include "hira/isolation_map.hpp"
#include "hira/timing.hpp"
#include "hira/types.hpp"

namespace hira {

enum class CommandType { Act, Pre, Read, Write, Ref };

struct Command {
  CommandType type = CommandType::Pre;
  RowId row = -1;
  ColumnId column = -1;

  static Command act(RowId row) { return {CommandType::Act, row, -1}; }
  static Command pre() { return {CommandType::Pre, -1, -1}; }
  static Command read(ColumnId col) { return {CommandType::Read, -1, col}; }
  static Command write(ColumnId col) { return {CommandType::Write, -1, col}; }
  static Command ref() { return {CommandType::Ref, -1, -1}; }
};

// Electrical behavior knobs for the engineered ACT-PRE-ACT sequence. Defaults
// put the reliable region at t1 in {3, 4.5} ns (a 1.5 ns first phase is too
// short to enable the sense amplifiers) and t2 up to 4.5 ns (beyond that the
// first row's wordline has already dropped when the second ACT arrives).
struct ElectricalWindows {
  picoseconds sense_enable_min = 3000;
  picoseconds wordline_disable_max = 4500;
  picoseconds bankio_disconnect_min = 3000;
};

enum class HiraOutcome {
  None,             // command was not the closing ACT of a HiRA sequence
  DualOpen,         // both rows latched in isolated subarrays
  Corrupted,        // subarrays share circuitry; both rows' data lost
  SecondActIgnored, // t1 too short: first activation aborted, second ACT dropped
  FirstRowClosed,   // t2 too long: first row's wordline dropped before second ACT
};

enum class BankPhase {
  Precharged,
  Activating,  // Active with tRCD not yet satisfied
  Active,
  HiraWindow,  // engineered PRE issued, waiting for the second ACT
  DualActive,
  Precharging,  // Precharged with tRP not yet satisfied
};

// Ground-truth row flags. Bit flips and corruption are deterministic pattern
// XORs so a read-back comparison detects them; they persist until the row is
// rewritten.
struct RowFlags {
  static constexpr std::uint8_t kCorrupted = 1 << 0;
  static constexpr std::uint8_t kPartialRestore = 1 << 1;
  static constexpr std::uint8_t kBitFlip = 1 << 2;
  static constexpr std::uint8_t kRetentionExpired = 1 << 3;
};

struct RowState {
  std::uint8_t pattern = 0;
  std::uint8_t flags = 0;
  std::uint64_t hammer_count = 0;  // aggressor activations since last restore
  picoseconds last_restore = 0;
  picoseconds max_restore_gap = 0;  // watermark of observed restore-to-restore gaps

  bool corrupted() const { return flags & RowFlags::kCorrupted; }
  bool partial_restore() const { return flags & RowFlags::kPartialRestore; }
  bool bit_flipped() const { return flags & RowFlags::kBitFlip; }
  bool retention_expired() const { return flags & RowFlags::kRetentionExpired; }
};

struct RowCoord {
  RankId rank = 0;
  BankId bank = 0;
  RowId row = 0;
  bool operator==(const RowCoord&) const = default;
};

struct CommandResult {
  bool accepted = false;
  std::string violation;  // non-empty when rejected
  HiraOutcome hira = HiraOutcome::None;
  std::vector<RowCoord> new_flips;  // victims whose bit-flip flag was just set
  std::uint8_t read_value = 0;      // RD only
};

struct BankState {
  BankPhase phase = BankPhase::Precharged;
  RowId row_a = -1;  // active row (first HiRA row while dual-open)
  RowId row_b = -1;  // second HiRA row
  picoseconds act_a_time = std::numeric_limits<picoseconds>::min() / 4;
  picoseconds act_b_time = std::numeric_limits<picoseconds>::min() / 4;
  picoseconds last_act_time = std::numeric_limits<picoseconds>::min() / 4;
  picoseconds pre_time = std::numeric_limits<picoseconds>::min() / 4;
  picoseconds hira_pre_time = 0;  // engineered PRE inside a HiRA sequence

  // Six-valued view with Activating/Precharging derived from the gates.
  BankPhase phase_at(picoseconds t, const TimingParams& tp) const;
};

struct GroundTruthConfig {
  std::uint64_t n_rh_true = 50000;  // true RowHammer threshold of the chip
  // Extra allowance on top of tREFW before a restore gap counts as retention
  // expiry. Scheduler-level slack legitimately delays restores past their
  // nominal instants by bounded amounts; the harness sets this to that bound.
  picoseconds retention_grace = 0;
};

struct ChipStats {
  std::int64_t commands = 0;
  std::int64_t acts = 0;
  std::int64_t tfaw_violations = 0;   // >4 ACTs within tFAW on a rank
  std::int64_t bit_flips = 0;
  std::int64_t corrupted_rows = 0;    // corruption events
  std::int64_t partial_restores = 0;
  std::int64_t retention_expiries = 0;
};

// Cycle-level model of one memory channel: ranks x banks of DRAM with timing
// enforcement, the HiRA dual-activation path, and an electrical ground-truth
// layer (data, charge restoration, hammer counters) used to verify every
// scheduling decision made above it.
//
// Deterministic single-threaded state machine; command times must be
// monotonically non-decreasing.
class DramChip {
 public:
  DramChip(Geometry geometry, TimingParams timing, IsolationMap map,
           ElectricalWindows windows = {}, GroundTruthConfig gt = {});

  // `hira_flagged` marks the engineered PRE (tRAS violation allowed) and the
  // second ACT (tRP violation allowed) of a HiRA sequence; everything else is
  // checked against nominal timing.
  CommandResult issue(RankId rank, BankId bank, const Command& cmd,
                      picoseconds t, bool hira_flagged = false);

  const Geometry& geometry() const { return geom_; }
  const TimingParams& timing() const { return timing_; }
  const IsolationMap& isolation() const { return map_; }
  const ElectricalWindows& windows() const { return windows_; }
  const GroundTruthConfig& ground_truth_config() const { return gt_; }
  const ChipStats& stats() const { return stats_; }

  const BankState& bank(RankId rank, BankId bank) const;
  BankPhase bank_phase(RankId rank, BankId bank, picoseconds t) const;

  // Ground-truth access for harnesses and tests. poke writes data, restores
  // the row, and clears its flags (the SoftMC-style initialize privilege).
  void poke_row(RankId rank, BankId bank, RowId row, std::uint8_t pattern,
                picoseconds t);
  const RowState& row_state(RankId rank, BankId bank, RowId row) const;
  bool compare_row(RankId rank, BankId bank, RowId row,
                   std::uint8_t expected) const;

  // Flags (and counts) every row whose restore gap exceeds
  // tREFW + retention_grace as of time t.
  void check_retention(picoseconds t);

  // Largest restore-to-restore gap observed on any row, including the
  // still-open gap at time t.
  picoseconds max_restore_gap(picoseconds t) const;

  // Earliest time an ACT on this rank satisfies the four-activation window,
  // given the rank's recorded ACT history.
  picoseconds tfaw_earliest(RankId rank, picoseconds t) const;

  std::int64_t rows_refreshed_per_ref() const;  // diagnostic

  // CSV "bank,subarray,row,hammer_count,last_restore_ps,flags" for one rank.
  void dump_ground_truth(RankId rank, std::ostream& out) const;

 private:
  struct RankState {
    picoseconds ref_busy_until = std::numeric_limits<picoseconds>::min() / 4;
    std::vector<picoseconds> act_history;  // ring of the last 4 ACT times
    int act_head = 0;
  };

  std::size_t bank_index(RankId rank, BankId bank) const;
  std::size_t row_index(RankId rank, BankId bank, RowId row) const;
  RowState& row(RankId rank, BankId bank, RowId r);

  CommandResult reject(const std::string& why) const;
  void record_act(RankId rank, picoseconds t);
  void register_hammer(RankId rank, BankId bank, RowId row,
                       std::vector<RowCoord>& flips);
  // Close a row whose wordline was held for `hold`; full hold restores it,
  // a short hold leaves it partially restored (flagged and corrupted).
  void close_row(RankId rank, BankId bank, RowId row, picoseconds t,
                 picoseconds hold);
  void corrupt_row(RankId rank, BankId bank, RowId row);
  void restore_row(RankId rank, BankId bank, RowId row, picoseconds t);
  // Resolve a stale HiraWindow (no second ACT arrived inside the electrical
  // window): the interrupted precharge completes and the first row closes.
  void resolve_expired_hira_window(RankId rank, BankId bank, BankState& bs,
                                   picoseconds t);

  CommandResult do_act(RankId rank, BankId bank, BankState& bs, RowId row,
                       picoseconds t, bool hira_flagged);
  CommandResult do_pre(RankId rank, BankId bank, BankState& bs, picoseconds t,
                       bool hira_flagged);
  CommandResult do_column(RankId rank, BankId bank, BankState& bs,
                          const Command& cmd, picoseconds t);
  CommandResult do_ref(RankId rank, picoseconds t);

  Geometry geom_;
  TimingParams timing_;
  IsolationMap map_;
  ElectricalWindows windows_;
  GroundTruthConfig gt_;

  std::vector<BankState> banks_;
  std::vector<RankState> ranks_;
  std::vector<RowState> rows_;
  // Baseline REF bookkeeping: next row to refresh and fractional-row credit.
  std::vector<RowId> ref_cursor_;
  std::vector<picoseconds> ref_credit_;

  picoseconds last_command_time_ = std::numeric_limits<picoseconds>::min() / 4;
  ChipStats stats_;
};

}  // namespace hira
