#pragma once

#include <stdexcept>
#include <string>

#include "hira/types.hpp"

namespace hira {

// DDR4-style timing parameters, all in picoseconds.
//
// The default tRP is 14.25 ns, which keeps tRC = tRAS + tRP = 46.25 ns
// consistent with the refresh-latency arithmetic used throughout. Some DDR4
// datasheets quote 14.5 ns instead; pass a custom tRP for that variant.
struct TimingParams {
  picoseconds tRCD = 14250;        // ACT -> column access
  picoseconds tRAS = 32000;        // ACT -> PRE (charge restoration)
  picoseconds tRP = 14250;         // PRE -> ACT
  picoseconds tRC = 46250;         // ACT -> ACT, == tRAS + tRP
  picoseconds tRFC = 350000;       // REF duration (rank blocked)
  picoseconds tREFI = 7800000;     // REF command interval
  picoseconds tREFW = 64000000000; // refresh window (64 ms)
  picoseconds tFAW = 30000;        // four-activation window

  void validate() const {
    auto positive = [](picoseconds v, const char* name) {
      if (v <= 0) throw std::invalid_argument(std::string(name) + " must be positive");
    };
    positive(tRCD, "tRCD");
    positive(tRAS, "tRAS");
    positive(tRP, "tRP");
    positive(tRC, "tRC");
    positive(tRFC, "tRFC");
    positive(tREFI, "tREFI");
    positive(tREFW, "tREFW");
    positive(tFAW, "tFAW");
    if (tRC != tRAS + tRP)
      throw std::invalid_argument("tRC must equal tRAS + tRP");
    if (tREFI >= tREFW)
      throw std::invalid_argument("tREFI must be smaller than tREFW");
    if (tRFC >= tREFI)
      throw std::invalid_argument("tRFC must be smaller than tREFI");
  }

  static TimingParams ddr4() { return TimingParams{}; }
};

}  // namespace hira
