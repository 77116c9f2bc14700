#include "hira/dram_core.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace hira {

namespace {
constexpr std::uint8_t kCorruptionXor = 0xA5;
constexpr std::uint8_t kBitFlipXor = 0x01;
}  // namespace

BankPhase BankState::phase_at(picoseconds t, const TimingParams& tp) const {
  switch (phase) {
    case BankPhase::Precharged:
      return (t < pre_time + tp.tRP) ? BankPhase::Precharging
                                     : BankPhase::Precharged;
    case BankPhase::Active:
      return (t < act_a_time + tp.tRCD) ? BankPhase::Activating
                                        : BankPhase::Active;
    default:
      return phase;
  }
}

DramChip::DramChip(Geometry geometry, TimingParams timing, IsolationMap map,
                   ElectricalWindows windows, GroundTruthConfig gt)
    : geom_(std::move(geometry)),
      timing_(timing),
      map_(std::move(map)),
      windows_(windows),
      gt_(gt) {
  geom_.validate();
  timing_.validate();
  map_.check_invariants();
  if (map_.subarrays() != geom_.subarrays_per_bank)
    throw std::invalid_argument("isolation map size does not match geometry");

  const std::size_t nbanks =
      static_cast<std::size_t>(geom_.ranks_per_channel * geom_.banks_per_rank);
  banks_.assign(nbanks, BankState{});
  ranks_.assign(static_cast<std::size_t>(geom_.ranks_per_channel), RankState{});
  for (auto& r : ranks_) r.act_history.assign(4, std::numeric_limits<picoseconds>::min() / 4);
  rows_.assign(nbanks * static_cast<std::size_t>(geom_.rows_per_bank()),
               RowState{});
  ref_cursor_.assign(nbanks, 0);
  ref_credit_.assign(nbanks, 0);
}

std::size_t DramChip::bank_index(RankId rank, BankId bank) const {
  if (rank < 0 || rank >= geom_.ranks_per_channel || bank < 0 ||
      bank >= geom_.banks_per_rank)
    throw std::out_of_range("rank/bank out of range");
  return static_cast<std::size_t>(rank) * geom_.banks_per_rank + bank;
}

std::size_t DramChip::row_index(RankId rank, BankId bank, RowId row) const {
  if (row < 0 || row >= geom_.rows_per_bank())
    throw std::out_of_range("row out of range");
  return bank_index(rank, bank) * static_cast<std::size_t>(geom_.rows_per_bank()) +
         static_cast<std::size_t>(row);
}

RowState& DramChip::row(RankId rank, BankId bank, RowId r) {
  return rows_[row_index(rank, bank, r)];
}

const BankState& DramChip::bank(RankId rank, BankId bank) const {
  return banks_[bank_index(rank, bank)];
}

BankPhase DramChip::bank_phase(RankId rank, BankId bank, picoseconds t) const {
  return banks_[bank_index(rank, bank)].phase_at(t, timing_);
}

CommandResult DramChip::reject(const std::string& why) const {
  CommandResult r;
  r.accepted = false;
  r.violation = why;
  return r;
}

void DramChip::record_act(RankId rank, picoseconds t) {
  auto& rs = ranks_[static_cast<std::size_t>(rank)];
  // Count ACTs already inside the trailing tFAW window; a fifth one is a
  // power-constraint violation (recorded, not rejected: enforcement is the
  // scheduler's job).
  int in_window = 0;
  for (picoseconds a : rs.act_history)
    if (a > t - timing_.tFAW) ++in_window;
  if (in_window >= 4) ++stats_.tfaw_violations;
  rs.act_history[static_cast<std::size_t>(rs.act_head)] = t;
  rs.act_head = (rs.act_head + 1) % 4;
  ++stats_.acts;
}

picoseconds DramChip::tfaw_earliest(RankId rank, picoseconds t) const {
  const auto& rs = ranks_[static_cast<std::size_t>(rank)];
  int in_window = 0;
  picoseconds oldest = std::numeric_limits<picoseconds>::max();
  for (picoseconds a : rs.act_history)
    if (a > t - timing_.tFAW) {
      ++in_window;
      oldest = std::min(oldest, a);
    }
  if (in_window < 4) return t;
  return oldest + timing_.tFAW;
}

void DramChip::register_hammer(RankId rank, BankId bank, RowId r,
                               std::vector<RowCoord>& flips) {
  // Disturbance reaches the two physically adjacent rows; adjacency exists
  // only within a subarray (subarray-edge rows have a single neighbor).
  const SubarrayId sa = geom_.subarray_of(r);
  for (RowId victim : {r - 1, r + 1}) {
    if (victim < 0 || victim >= geom_.rows_per_bank()) continue;
    if (geom_.subarray_of(victim) != sa) continue;
    RowState& v = row(rank, bank, victim);
    ++v.hammer_count;
    if (v.hammer_count >= gt_.n_rh_true && !v.bit_flipped()) {
      v.flags |= RowFlags::kBitFlip;
      v.pattern ^= kBitFlipXor;
      ++stats_.bit_flips;
      flips.push_back({rank, bank, victim});
    }
  }
}

void DramChip::corrupt_row(RankId rank, BankId bank, RowId r) {
  RowState& rs = row(rank, bank, r);
  if (!rs.corrupted()) {
    rs.flags |= RowFlags::kCorrupted;
    rs.pattern ^= kCorruptionXor;
    ++stats_.corrupted_rows;
  }
}

void DramChip::restore_row(RankId rank, BankId bank, RowId r, picoseconds t) {
  RowState& rs = row(rank, bank, r);
  const picoseconds gap = t - rs.last_restore;
  rs.max_restore_gap = std::max(rs.max_restore_gap, gap);
  if (gap > timing_.tREFW + gt_.retention_grace &&
      !rs.retention_expired()) {
    rs.flags |= RowFlags::kRetentionExpired;
    ++stats_.retention_expiries;
  }
  rs.hammer_count = 0;
  rs.last_restore = t;
}

void DramChip::close_row(RankId rank, BankId bank, RowId r, picoseconds t,
                         picoseconds hold) {
  if (hold >= timing_.tRAS) {
    restore_row(rank, bank, r, t);
  } else {
    RowState& rs = row(rank, bank, r);
    if (!rs.partial_restore()) {
      rs.flags |= RowFlags::kPartialRestore;
      ++stats_.partial_restores;
    }
    // Restoration was cut short; the stored value is unreliable. Modeled as a
    // deterministic corruption so read-back comparisons catch it.
    corrupt_row(rank, bank, r);
  }
}

void DramChip::resolve_expired_hira_window(RankId rank, BankId bank,
                                           BankState& bs, picoseconds t) {
  if (bs.phase != BankPhase::HiraWindow) return;
  if (t - bs.hira_pre_time <= windows_.wordline_disable_max) return;
  // No second ACT arrived in time: the precharge ran to completion and the
  // first row's wordline dropped after only t1 of restoration.
  close_row(rank, bank, bs.row_a, bs.hira_pre_time,
            bs.hira_pre_time - bs.act_a_time);
  bs.phase = BankPhase::Precharged;
  bs.pre_time = bs.hira_pre_time;
  bs.row_a = -1;
}

CommandResult DramChip::issue(RankId rank, BankId bank, const Command& cmd,
                              picoseconds t, bool hira_flagged) {
  if (t < last_command_time_)
    throw std::logic_error("command times must be monotonically non-decreasing");
  ++stats_.commands;

  auto dispatch = [&]() -> CommandResult {
    auto& rankstate = ranks_[static_cast<std::size_t>(rank)];
    if (t < rankstate.ref_busy_until)
      return reject("rank busy with REF (tRFC)");

    if (cmd.type == CommandType::Ref) return do_ref(rank, t);

    BankState& bs = banks_[bank_index(rank, bank)];
    // A late hira-flagged ACT is itself the resolution of the window (the
    // FirstRowClosed outcome); anything else arriving after the window
    // expired sees the completed precharge.
    if (!(cmd.type == CommandType::Act && hira_flagged))
      resolve_expired_hira_window(rank, bank, bs, t);

    switch (cmd.type) {
      case CommandType::Act:
        return do_act(rank, bank, bs, cmd.row, t, hira_flagged);
      case CommandType::Pre:
        return do_pre(rank, bank, bs, t, hira_flagged);
      case CommandType::Read:
      case CommandType::Write:
        return do_column(rank, bank, bs, cmd, t);
      default:
        return reject("unknown command");
    }
  };

  CommandResult res = dispatch();
  // Rejected probes do not advance the clock; callers may retry earlier.
  if (res.accepted) last_command_time_ = t;
  return res;
}

CommandResult DramChip::do_act(RankId rank, BankId bank, BankState& bs,
                               RowId r, picoseconds t, bool hira_flagged) {
  if (r < 0 || r >= geom_.rows_per_bank()) return reject("row out of range");

  if (bs.phase == BankPhase::HiraWindow) {
    if (!hira_flagged)
      return reject("unflagged ACT while bank awaits a HiRA second ACT");

    const picoseconds t1 = bs.hira_pre_time - bs.act_a_time;
    const picoseconds t2 = t - bs.hira_pre_time;
    CommandResult res;
    res.accepted = true;

    if (t1 < windows_.sense_enable_min) {
      // The engineered PRE interrupted the first activation before the sense
      // amplifiers latched: the first row's charge state is lost and the chip
      // drops the out-of-spec second ACT.
      res.hira = HiraOutcome::SecondActIgnored;
      corrupt_row(rank, bank, bs.row_a);
      bs.phase = BankPhase::Precharged;
      bs.pre_time = bs.hira_pre_time;
      bs.row_a = -1;
      return res;
    }
    if (t2 > windows_.wordline_disable_max) {
      // Second ACT arrived after the first row's wordline dropped: the bank
      // behaves like a slow nominal cycle without the full tRP.
      res.hira = HiraOutcome::FirstRowClosed;
      close_row(rank, bank, bs.row_a, bs.hira_pre_time, t1);
      bs.phase = BankPhase::Active;
      bs.row_a = r;
      bs.row_b = -1;
      bs.act_a_time = t;
      bs.last_act_time = t;
      record_act(rank, t);
      register_hammer(rank, bank, r, res.new_flips);
      return res;
    }
    if (!map_.isolated(geom_.subarray_of(bs.row_a), geom_.subarray_of(r))) {
      // Shared bitlines / sense amplifiers: both rows' data is lost.
      res.hira = HiraOutcome::Corrupted;
      corrupt_row(rank, bank, bs.row_a);
      corrupt_row(rank, bank, r);
      bs.phase = BankPhase::Active;
      bs.row_a = r;
      bs.row_b = -1;
      bs.act_a_time = t;
      bs.last_act_time = t;
      record_act(rank, t);
      register_hammer(rank, bank, r, res.new_flips);
      return res;
    }

    res.hira = HiraOutcome::DualOpen;
    bs.phase = BankPhase::DualActive;
    bs.row_b = r;
    bs.act_b_time = t;
    bs.last_act_time = t;
    record_act(rank, t);
    register_hammer(rank, bank, r, res.new_flips);
    return res;
  }

  if (bs.phase == BankPhase::DualActive)
    return reject("ACT to a bank in DualActive");
  if (bs.phase == BankPhase::Active)
    return reject("ACT to a bank with an open row");

  // Precharged.
  if (t < bs.pre_time + timing_.tRP) return reject("ACT violates tRP");
  if (t < bs.last_act_time + timing_.tRC) return reject("ACT violates tRC");

  CommandResult res;
  res.accepted = true;
  bs.phase = BankPhase::Active;
  bs.row_a = r;
  bs.row_b = -1;
  bs.act_a_time = t;
  bs.last_act_time = t;
  record_act(rank, t);
  register_hammer(rank, bank, r, res.new_flips);
  return res;
}

CommandResult DramChip::do_pre(RankId rank, BankId bank, BankState& bs,
                               picoseconds t, bool hira_flagged) {
  CommandResult res;
  switch (bs.phase) {
    case BankPhase::Precharged:
      res.accepted = true;  // PRE to an idle bank is a no-op
      return res;
    case BankPhase::Active: {
      const picoseconds hold = t - bs.act_a_time;
      if (hira_flagged) {
        // Engineered PRE: interrupts the precharge with the upcoming second
        // ACT; tRAS may be violated. The first row stays connected to its
        // local row buffer for now.
        bs.phase = BankPhase::HiraWindow;
        bs.hira_pre_time = t;
        res.accepted = true;
        return res;
      }
      if (hold < timing_.tRAS) return reject("PRE violates tRAS");
      close_row(rank, bank, bs.row_a, t, hold);
      bs.phase = BankPhase::Precharged;
      bs.pre_time = t;
      bs.row_a = -1;
      res.accepted = true;
      return res;
    }
    case BankPhase::DualActive: {
      // One precharge closes both rows.
      const picoseconds hold_b = t - bs.act_b_time;
      if (!hira_flagged && hold_b < timing_.tRAS)
        return reject("PRE violates tRAS for the second HiRA row");
      close_row(rank, bank, bs.row_b, t, hold_b);
      close_row(rank, bank, bs.row_a, t, t - bs.act_a_time);
      bs.phase = BankPhase::Precharged;
      bs.pre_time = t;
      bs.row_a = -1;
      bs.row_b = -1;
      res.accepted = true;
      return res;
    }
    case BankPhase::HiraWindow:
      return reject("PRE while bank awaits a HiRA second ACT");
    default:
      return reject("PRE in unexpected phase");
  }
}

CommandResult DramChip::do_column(RankId rank, BankId bank, BankState& bs,
                                  const Command& cmd, picoseconds t) {
  if (cmd.column < 0 || cmd.column >= geom_.columns_per_row)
    return reject("column out of range");

  RowId target = -1;
  picoseconds act_time = 0;
  if (bs.phase == BankPhase::Active) {
    target = bs.row_a;
    act_time = bs.act_a_time;
  } else if (bs.phase == BankPhase::DualActive) {
    // Only the second row's local row buffer is connected to the bank I/O.
    target = bs.row_b;
    act_time = bs.act_b_time;
  } else {
    return reject("RD/WR to a bank not in Active or DualActive state");
  }
  if (t < act_time + timing_.tRCD) return reject("column access violates tRCD");

  RowState& rs = row(rank, bank, target);
  if (t - rs.last_restore > timing_.tREFW + gt_.retention_grace &&
      !rs.retention_expired()) {
    rs.flags |= RowFlags::kRetentionExpired;
    ++stats_.retention_expiries;
  }

  CommandResult res;
  res.accepted = true;
  if (cmd.type == CommandType::Read) {
    res.read_value = rs.pattern;
  } else {
    // Whole-row pattern granularity: a write re-establishes reliable data.
    rs.pattern = static_cast<std::uint8_t>(cmd.column & 0xFF);
  }
  return res;
}

CommandResult DramChip::do_ref(RankId rank, picoseconds t) {
  auto& rankstate = ranks_[static_cast<std::size_t>(rank)];
  for (BankId b = 0; b < geom_.banks_per_rank; ++b) {
    const BankState& bs = banks_[bank_index(rank, b)];
    if (bs.phase != BankPhase::Precharged)
      return reject("REF requires all banks precharged");
    if (t < bs.pre_time + timing_.tRP) return reject("REF violates tRP");
  }

  CommandResult res;
  res.accepted = true;
  rankstate.ref_busy_until = t + timing_.tRFC;

  // Each REF restores the next rows_per_bank * tREFI / tREFW rows per bank,
  // tracked with a fractional credit so a full window covers every row.
  for (BankId b = 0; b < geom_.banks_per_rank; ++b) {
    const std::size_t bi = bank_index(rank, b);
    ref_credit_[bi] += geom_.rows_per_bank() * timing_.tREFI;
    const std::int64_t count = ref_credit_[bi] / timing_.tREFW;
    ref_credit_[bi] -= count * timing_.tREFW;
    for (std::int64_t i = 0; i < count; ++i) {
      restore_row(rank, b, ref_cursor_[bi], t + timing_.tRFC);
      ref_cursor_[bi] = (ref_cursor_[bi] + 1) % geom_.rows_per_bank();
    }
  }
  return res;
}

std::int64_t DramChip::rows_refreshed_per_ref() const {
  return geom_.rows_per_bank() * timing_.tREFI / timing_.tREFW;
}

void DramChip::poke_row(RankId rank, BankId bank, RowId r, std::uint8_t pattern,
                        picoseconds t) {
  RowState& rs = row(rank, bank, r);
  rs.pattern = pattern;
  rs.flags = 0;
  rs.hammer_count = 0;
  rs.last_restore = t;
}

const RowState& DramChip::row_state(RankId rank, BankId bank, RowId r) const {
  return rows_[row_index(rank, bank, r)];
}

bool DramChip::compare_row(RankId rank, BankId bank, RowId r,
                           std::uint8_t expected) const {
  return row_state(rank, bank, r).pattern == expected;
}

void DramChip::check_retention(picoseconds t) {
  for (auto& rs : rows_) {
    if (t - rs.last_restore > timing_.tREFW + gt_.retention_grace &&
        !(rs.flags & RowFlags::kRetentionExpired)) {
      rs.flags |= RowFlags::kRetentionExpired;
      ++stats_.retention_expiries;
    }
  }
}

picoseconds DramChip::max_restore_gap(picoseconds t) const {
  picoseconds worst = 0;
  for (const auto& rs : rows_) {
    worst = std::max(worst, rs.max_restore_gap);
    worst = std::max(worst, t - rs.last_restore);
  }
  return worst;
}

void DramChip::dump_ground_truth(RankId rank, std::ostream& out) const {
  out << "# hira ground-truth v1\n";
  out << "bank,subarray,row,hammer_count,last_restore_ps,flags\n";
  for (BankId b = 0; b < geom_.banks_per_rank; ++b) {
    for (RowId r = 0; r < geom_.rows_per_bank(); ++r) {
      const RowState& rs = row_state(rank, b, r);
      out << b << ',' << geom_.subarray_of(r) << ',' << r << ','
          << rs.hammer_count << ',' << rs.last_restore << ','
          << static_cast<int>(rs.flags) << '\n';
    }
  }
}

}  // namespace hira
