#include "hira/refresh_structs.hpp"

#include <algorithm>
#include <stdexcept>

namespace hira {

std::uint64_t RefreshTable::insert(picoseconds deadline, BankId bank,
                                   RefreshKind kind, RowId victim) {
  if (kind == RefreshKind::Invalid)
    throw std::invalid_argument("live refresh table entries cannot be Invalid");
  if (full())
    throw std::length_error("refresh table overflow: occupancy would exceed capacity");
  RefreshRequest r;
  r.deadline = deadline;
  r.bank = bank;
  r.kind = kind;
  r.victim = victim;
  r.seq = next_seq_++;
  entries_.push_back(r);
  peak_ = std::max(peak_, entries_.size());
  return r.seq;
}

void RefreshTable::remove(std::uint64_t seq) {
  for (auto it = entries_.begin(); it != entries_.end(); ++it) {
    if (it->seq == seq) {
      entries_.erase(it);
      return;
    }
  }
  throw std::invalid_argument("refresh table entry not found");
}

bool refresh_scan_before(const RefreshRequest& a, const RefreshRequest& b) {
  if (a.deadline != b.deadline) return a.deadline < b.deadline;
  if (a.kind != b.kind) return a.kind == RefreshKind::Preventive;
  return a.seq < b.seq;
}

namespace {
bool scan_before(const RefreshRequest& a, const RefreshRequest& b) {
  return refresh_scan_before(a, b);
}
}  // namespace

std::vector<RefreshRequest> RefreshTable::ordered() const {
  std::vector<RefreshRequest> out = entries_;
  std::sort(out.begin(), out.end(), scan_before);
  return out;
}

std::vector<RefreshRequest> RefreshTable::ordered(BankId bank) const {
  std::vector<RefreshRequest> out;
  for (const auto& e : entries_)
    if (e.bank == bank) out.push_back(e);
  std::sort(out.begin(), out.end(), scan_before);
  return out;
}

std::optional<RefreshRequest> RefreshTable::earliest_deadline() const {
  std::optional<RefreshRequest> best;
  for (const auto& e : entries_)
    if (!best || scan_before(e, *best)) best = e;
  return best;
}

RefPtrTable::RefPtrTable(std::int64_t banks, std::int64_t subarrays,
                         std::int64_t rows_per_subarray)
    : banks_(banks),
      subarrays_(subarrays),
      rows_per_subarray_(rows_per_subarray) {
  next_.assign(static_cast<std::size_t>(banks * subarrays), 0);
  count_.assign(static_cast<std::size_t>(banks * subarrays), 0);
}

std::size_t RefPtrTable::index(BankId bank, SubarrayId sa) const {
  if (bank < 0 || bank >= banks_ || sa < 0 || sa >= subarrays_)
    throw std::out_of_range("refptr index out of range");
  return static_cast<std::size_t>(bank) * subarrays_ + sa;
}

RowId RefPtrTable::take(BankId bank, SubarrayId sa) {
  const std::size_t i = index(bank, sa);
  if (count_[i] >= rows_per_subarray_)
    throw std::logic_error("subarray already lap-complete");
  const RowId row = static_cast<RowId>(sa) * rows_per_subarray_ + next_[i];
  next_[i] = (next_[i] + 1) % rows_per_subarray_;
  ++count_[i];
  maybe_reset_lap(bank);
  return row;
}

void RefPtrTable::maybe_reset_lap(BankId bank) {
  for (SubarrayId sa = 0; sa < subarrays_; ++sa)
    if (count_[index(bank, sa)] < rows_per_subarray_) return;
  for (SubarrayId sa = 0; sa < subarrays_; ++sa) count_[index(bank, sa)] = 0;
}

std::int64_t RefPtrTable::refreshed_count(BankId bank, SubarrayId sa) const {
  return count_[index(bank, sa)];
}

RowId RefPtrTable::next_row(BankId bank, SubarrayId sa) const {
  return next_[index(bank, sa)];
}

std::optional<SubarrayId> RefPtrTable::pick_balanced(BankId bank) const {
  std::optional<SubarrayId> best;
  std::int64_t best_count = 0;
  for (SubarrayId sa = 0; sa < subarrays_; ++sa) {
    const std::int64_t c = refreshed_count(bank, sa);
    if (c >= rows_per_subarray_) continue;
    if (!best || c < best_count) {
      best = sa;
      best_count = c;
    }
  }
  return best;
}

void PrFifo::push(RowId victim) {
  if (full()) throw std::length_error("PR-FIFO overflow");
  q_.push_back(victim);
}

RowId PrFifo::front() const {
  if (q_.empty()) throw std::logic_error("PR-FIFO empty");
  return q_.front();
}

RowId PrFifo::pop() {
  const RowId v = front();
  q_.pop_front();
  return v;
}

SubarrayPairsTable::SubarrayPairsTable(const IsolationMap& map)
    : subarrays_(map.subarrays()) {
  bits_.assign(static_cast<std::size_t>(subarrays_) * subarrays_, false);
  for (SubarrayId a = 0; a < subarrays_; ++a)
    for (SubarrayId b = 0; b < subarrays_; ++b)
      bits_[static_cast<std::size_t>(a) * subarrays_ + b] = map.isolated(a, b);
  rebuild_partner_lists();
}

void SubarrayPairsTable::rebuild_partner_lists() {
  partners_.assign(static_cast<std::size_t>(subarrays_), {});
  for (SubarrayId a = 0; a < subarrays_; ++a)
    for (SubarrayId b = 0; b < subarrays_; ++b)
      if (bits_[static_cast<std::size_t>(a) * subarrays_ + b])
        partners_[static_cast<std::size_t>(a)].push_back(b);
}

bool SubarrayPairsTable::isolated(SubarrayId a, SubarrayId b) const {
  if (a < 0 || b < 0 || a >= subarrays_ || b >= subarrays_)
    throw std::out_of_range("subarray out of range");
  return bits_[static_cast<std::size_t>(a) * subarrays_ + b];
}

const std::vector<SubarrayId>& SubarrayPairsTable::partners(SubarrayId a) const {
  if (a < 0 || a >= subarrays_) throw std::out_of_range("subarray out of range");
  return partners_[static_cast<std::size_t>(a)];
}

void SubarrayPairsTable::inject_false_isolation(SubarrayId a, SubarrayId b) {
  bits_[static_cast<std::size_t>(a) * subarrays_ + b] = true;
  bits_[static_cast<std::size_t>(b) * subarrays_ + a] = true;
  rebuild_partner_lists();
}

bool SubarrayPairsTable::consistent_with(const IsolationMap& map) const {
  if (map.subarrays() != subarrays_) return false;
  for (SubarrayId a = 0; a < subarrays_; ++a)
    for (SubarrayId b = 0; b < subarrays_; ++b)
      if (isolated(a, b) != map.isolated(a, b)) return false;
  return true;
}

}  // namespace hira
