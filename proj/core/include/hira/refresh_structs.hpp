#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "hira/isolation_map.hpp"
#include "hira/types.hpp"

namespace hira {

enum class RefreshKind : std::uint8_t { Invalid = 0, Periodic, Preventive };

struct RefreshRequest;
// Refresh Table scan order: increasing deadline, preventive ahead of periodic
// on ties, then insertion order.
bool refresh_scan_before(const RefreshRequest& a, const RefreshRequest& b);

struct RefreshRequest {
  picoseconds deadline = 0;
  BankId bank = -1;
  RefreshKind kind = RefreshKind::Invalid;
  RowId victim = -1;        // preventive only
  std::uint64_t seq = 0;    // insertion order, deterministic tie-break
};

// Bounded store of pending refresh requests for one rank. Scan order is
// strictly increasing deadline; among equal deadlines preventive requests
// come first (they carry security deadlines), then insertion order.
class RefreshTable {
 public:
  explicit RefreshTable(std::size_t capacity = 68) : capacity_(capacity) {}

  std::uint64_t insert(picoseconds deadline, BankId bank, RefreshKind kind,
                       RowId victim = -1);
  void remove(std::uint64_t seq);

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t peak_occupancy() const { return peak_; }
  bool full() const { return entries_.size() >= capacity_; }

  // Entries in scan order, optionally restricted to one bank.
  std::vector<RefreshRequest> ordered() const;
  std::vector<RefreshRequest> ordered(BankId bank) const;

  // Live entries without ordering (allocation-free iteration).
  const std::vector<RefreshRequest>& entries() const { return entries_; }

  std::optional<RefreshRequest> earliest_deadline() const;

 private:
  std::size_t capacity_;
  std::size_t peak_ = 0;
  std::uint64_t next_seq_ = 0;
  std::vector<RefreshRequest> entries_;  // unordered live entries
};

// Per (bank, subarray) pointer to the next row to refresh plus the count of
// rows already refreshed in the current lap over the bank. When every
// subarray completes a lap the counts reset; one lap corresponds to one
// refresh window's worth of periodic requests.
class RefPtrTable {
 public:
  RefPtrTable(std::int64_t banks, std::int64_t subarrays,
              std::int64_t rows_per_subarray);

  // Consume the next row of `sa`, returning its bank-local row id.
  RowId take(BankId bank, SubarrayId sa);

  std::int64_t refreshed_count(BankId bank, SubarrayId sa) const;
  RowId next_row(BankId bank, SubarrayId sa) const;

  // Balanced choice for refresh-access pairing: the subarray with the
  // smallest refreshed count (ties to the lowest index) among those isolated
  // from `demand_sa` and not yet lap-complete. Declines when the globally
  // least-refreshed subarray has fallen two or more rows behind every
  // eligible candidate, so the aged entry falls through to a deadline
  // refresh that can reach the lagging subarray.
  template <typename IsolatedFn>
  std::optional<SubarrayId> pick_isolated_balanced(BankId bank,
                                                   IsolatedFn isolated) const {
    const std::int64_t global_min = min_count(bank, [](SubarrayId) { return true; });
    std::optional<SubarrayId> best;
    std::int64_t best_count = 0;
    for (SubarrayId sa = 0; sa < subarrays_; ++sa) {
      const std::int64_t c = refreshed_count(bank, sa);
      if (c >= rows_per_subarray_) continue;
      if (!isolated(sa)) continue;
      if (!best || c < best_count) {
        best = sa;
        best_count = c;
      }
    }
    if (best && best_count > global_min + 1) return std::nullopt;
    return best;
  }

  // Least-refreshed subarray overall (deadline refreshes).
  std::optional<SubarrayId> pick_balanced(BankId bank) const;

 private:
  template <typename Pred>
  std::int64_t min_count(BankId bank, Pred pred) const {
    std::int64_t m = rows_per_subarray_;
    for (SubarrayId sa = 0; sa < subarrays_; ++sa)
      if (pred(sa)) m = std::min(m, refreshed_count(bank, sa));
    return m;
  }

  std::size_t index(BankId bank, SubarrayId sa) const;
  void maybe_reset_lap(BankId bank);

  std::int64_t banks_;
  std::int64_t subarrays_;
  std::int64_t rows_per_subarray_;
  std::vector<RowId> next_;
  std::vector<std::int64_t> count_;
};

// Per-bank FIFO of queued preventive-refresh victim rows. Capacity overflow
// is handled by back-pressure at the ACT issue site, never by dropping.
class PrFifo {
 public:
  explicit PrFifo(std::size_t capacity = 4) : capacity_(capacity) {}

  bool full() const { return q_.size() >= capacity_; }
  bool empty() const { return q_.empty(); }
  std::size_t size() const { return q_.size(); }
  std::size_t capacity() const { return capacity_; }

  void push(RowId victim);
  RowId front() const;
  RowId pop();

 private:
  std::size_t capacity_;
  std::deque<RowId> q_;
};

// The memory controller's copy of the subarray-isolation knowledge, one list
// of partner subarrays per subarray. Normally an exact mirror of the chip's
// IsolationMap; fault injection can deliberately desynchronize an entry to
// demonstrate that scheduling correctness depends on this table.
class SubarrayPairsTable {
 public:
  SubarrayPairsTable() = default;
  explicit SubarrayPairsTable(const IsolationMap& map);

  std::int32_t subarrays() const { return subarrays_; }
  bool isolated(SubarrayId a, SubarrayId b) const;
  const std::vector<SubarrayId>& partners(SubarrayId a) const;

  // Fault injection: claim (a, b) are isolated even though they are not.
  void inject_false_isolation(SubarrayId a, SubarrayId b);

  bool consistent_with(const IsolationMap& map) const;

 private:
  void rebuild_partner_lists();

  std::int32_t subarrays_ = 0;
  std::vector<bool> bits_;
  std::vector<std::vector<SubarrayId>> partners_;
};

}  // namespace hira
