#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hira/geometry.hpp"
#include "hira/types.hpp"

namespace hira {

// One demand request of a trace source. `gap` is the inter-arrival distance
// to the previous request of the same source, in controller cycles.
struct TraceRequest {
  std::int64_t gap = 0;
  bool is_write = false;
  std::uint64_t address = 0;
};

enum class TraceKind { Stream, Random, RowHit, Hammer };

TraceKind trace_kind_from_string(const std::string& s);
const char* to_string(TraceKind k);

struct TraceGenParams {
  TraceKind kind = TraceKind::Random;
  std::int64_t count = 1000;
  std::int64_t gap = 0;           // cycles between requests
  double write_fraction = 0.0;
  std::int64_t burst = 32;        // rowhit: requests per row
  // hammer: double-sided aggressors around this victim (channel-local bank
  // coordinates); alternates victim-1 / victim+1 back to back so the bank
  // self-paces at the tRC floor.
  RankId hammer_rank = 0;
  BankId hammer_bank = 0;
  RowId hammer_victim = -1;  // default: middle row of subarray 0
};

// Deterministic for a fixed seed.
std::vector<TraceRequest> generate_trace(const TraceGenParams& params,
                                         const Geometry& geom,
                                         std::uint64_t seed);

// Text format: one request per line, "gap op hex-address" with op in {R, W};
// '#' starts a comment. Writers emit a "# hira trace v1" header line.
std::vector<TraceRequest> parse_trace(std::istream& in);
std::vector<TraceRequest> load_trace(const std::string& path);
void write_trace(const std::vector<TraceRequest>& trace, std::ostream& out);

}  // namespace hira
