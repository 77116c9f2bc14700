#include "hira/event_log.hpp"

#include <ostream>

namespace hira {

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Act: return "ACT";
    case EventKind::Pre: return "PRE";
    case EventKind::Rd: return "RD";
    case EventKind::Wr: return "WR";
    case EventKind::Ref: return "REF";
    case EventKind::HiraRa: return "HIRA_RA";
    case EventKind::HiraRr: return "HIRA_RR";
    case EventKind::RefreshStandalone: return "REFRESH_STANDALONE";
    default: return "?";
  }
}

const char* to_string(RefreshKind k) {
  switch (k) {
    case RefreshKind::Periodic: return "periodic";
    case RefreshKind::Preventive: return "preventive";
    default: return "-";
  }
}

void EventLog::write_header(std::ostream& out) {
  out << "# hira event-log v1\n";
  out << "time_ps,event,bank,rowA,rowB,kind\n";
}

void EventLog::emit(picoseconds time, EventKind event, std::int64_t global_bank,
                    RowId row_a, RowId row_b, RefreshKind kind) {
  ++counts_[static_cast<std::size_t>(event)];
  if (!out_) return;
  *out_ << time << ',' << to_string(event) << ',' << global_bank << ','
        << row_a << ',' << row_b << ',' << to_string(kind) << '\n';
}

}  // namespace hira
