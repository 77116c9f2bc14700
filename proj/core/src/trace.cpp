#include "hira/trace.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hira/rng.hpp"

namespace hira {

TraceKind trace_kind_from_string(const std::string& s) {
  if (s == "stream") return TraceKind::Stream;
  if (s == "random") return TraceKind::Random;
  if (s == "rowhit") return TraceKind::RowHit;
  if (s == "hammer") return TraceKind::Hammer;
  throw std::invalid_argument("unknown trace kind: " + s);
}

const char* to_string(TraceKind k) {
  switch (k) {
    case TraceKind::Stream: return "stream";
    case TraceKind::Random: return "random";
    case TraceKind::RowHit: return "rowhit";
    case TraceKind::Hammer: return "hammer";
  }
  return "?";
}

std::vector<TraceRequest> generate_trace(const TraceGenParams& params,
                                         const Geometry& geom,
                                         std::uint64_t seed) {
  if (params.count < 0) throw std::invalid_argument("count must be >= 0");
  if (params.gap < 0) throw std::invalid_argument("gap must be >= 0");
  Rng rng(seed);
  std::vector<TraceRequest> out;
  out.reserve(static_cast<std::size_t>(params.count));
  const std::uint64_t capacity =
      static_cast<std::uint64_t>(geom.capacity_bytes());

  auto push = [&](std::uint64_t addr) {
    TraceRequest r;
    r.gap = params.gap;
    r.address = addr % capacity;
    r.is_write = params.write_fraction > 0.0 &&
                 rng.next_double() < params.write_fraction;
    out.push_back(r);
  };

  switch (params.kind) {
    case TraceKind::Stream: {
      // Sequential column walk; row hits dominate.
      const std::uint64_t row_bytes =
          static_cast<std::uint64_t>(geom.columns_per_row);
      std::uint64_t base =
          (rng.next_u64() % capacity) / row_bytes * row_bytes;
      for (std::int64_t i = 0; i < params.count; ++i)
        push((base + static_cast<std::uint64_t>(i)) % capacity);
      break;
    }
    case TraceKind::Random: {
      for (std::int64_t i = 0; i < params.count; ++i)
        push(rng.next_u64() % capacity);
      break;
    }
    case TraceKind::RowHit: {
      const std::uint64_t row_bytes =
          static_cast<std::uint64_t>(geom.columns_per_row);
      std::int64_t emitted = 0;
      while (emitted < params.count) {
        const std::uint64_t row_base =
            (rng.next_u64() % capacity) / row_bytes * row_bytes;
        for (std::int64_t j = 0; j < params.burst && emitted < params.count;
             ++j, ++emitted)
          push(row_base + rng.next_u64() % row_bytes);
      }
      break;
    }
    case TraceKind::Hammer: {
      RowId victim = params.hammer_victim;
      if (victim < 0) victim = geom.rows_per_subarray / 2;
      if (victim <= 0 || victim + 1 >= geom.rows_per_bank())
        throw std::invalid_argument("hammer victim needs both neighbors");
      DramAddress a;
      a.rank = params.hammer_rank;
      a.bank = params.hammer_bank;
      for (std::int64_t i = 0; i < params.count; ++i) {
        const RowId aggr = (i % 2 == 0) ? victim - 1 : victim + 1;
        a.subarray = geom.subarray_of(aggr);
        a.row_in_subarray = geom.row_within_subarray(aggr);
        a.column = 0;
        push(geom.encode(a));
      }
      break;
    }
  }
  return out;
}

std::vector<TraceRequest> parse_trace(std::istream& in) {
  std::vector<TraceRequest> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::int64_t gap;
    std::string op;
    std::string addr;
    if (!(ls >> gap)) continue;  // blank
    if (!(ls >> op >> addr) || (op != "R" && op != "W"))
      throw std::runtime_error("trace line " + std::to_string(lineno) +
                               ": expected 'gap R|W hex-address'");
    TraceRequest r;
    r.gap = gap;
    r.is_write = op == "W";
    r.address = std::stoull(addr, nullptr, 16);
    out.push_back(r);
  }
  return out;
}

std::vector<TraceRequest> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace: " + path);
  return parse_trace(in);
}

void write_trace(const std::vector<TraceRequest>& trace, std::ostream& out) {
  out << "# hira trace v1\n";
  for (const auto& r : trace) {
    out << r.gap << (r.is_write ? " W " : " R ") << std::hex << "0x"
        << r.address << std::dec << "\n";
  }
}

}  // namespace hira
