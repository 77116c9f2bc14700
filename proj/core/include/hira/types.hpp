#pragma once

#include <cstdint>

namespace hira {

// All simulation time is integer picoseconds. Datasheet values in nanoseconds
// convert exactly (14.25 ns == 14250 ps), so 46.25 ns / 78.25 ns arithmetic is
// reproduced without float drift.
using picoseconds = std::int64_t;

constexpr picoseconds operator""_ns(unsigned long long v) {
  return static_cast<picoseconds>(v) * 1000;
}
constexpr picoseconds operator""_ps(unsigned long long v) {
  return static_cast<picoseconds>(v);
}
constexpr picoseconds operator""_us(unsigned long long v) {
  return static_cast<picoseconds>(v) * 1000 * 1000;
}
constexpr picoseconds operator""_ms(unsigned long long v) {
  return static_cast<picoseconds>(v) * 1000 * 1000 * 1000;
}

using ChannelId = std::int32_t;
using RankId = std::int32_t;
using BankId = std::int32_t;
using SubarrayId = std::int32_t;
using RowId = std::int64_t;  // row index within a bank
using ColumnId = std::int64_t;

}  // namespace hira
