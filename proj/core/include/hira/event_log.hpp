#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "hira/refresh_structs.hpp"
#include "hira/types.hpp"

namespace hira {

enum class EventKind : int {
  Act = 0,
  Pre,
  Rd,
  Wr,
  Ref,
  HiraRa,
  HiraRr,
  RefreshStandalone,
  kCount,
};

const char* to_string(EventKind k);
const char* to_string(RefreshKind k);

// Scheduler event log: CSV "time_ps,event,bank,rowA,rowB,kind". `bank` is the
// channel-global bank index (rank * banks_per_rank + bank); `kind` names the
// refresh type on refresh events and is '-' otherwise. This log is the
// contract for trace-replay tests.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(std::ostream* out) : out_(out) {}

  void attach(std::ostream* out) { out_ = out; }

  void emit(picoseconds time, EventKind event, std::int64_t global_bank,
            RowId row_a = -1, RowId row_b = -1,
            RefreshKind kind = RefreshKind::Invalid);

  std::int64_t count(EventKind k) const {
    return counts_[static_cast<std::size_t>(k)];
  }

  static void write_header(std::ostream& out);

 private:
  std::ostream* out_ = nullptr;
  std::array<std::int64_t, static_cast<std::size_t>(EventKind::kCount)> counts_{};
};

}  // namespace hira
