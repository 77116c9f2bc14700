#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hira/types.hpp"

namespace hira {

// Symmetric, irreflexive relation over subarray indices: isolated(i, j) holds
// when subarrays i and j share no bitline or sense amplifier, i.e. a pair of
// rows drawn from them can be open simultaneously. The map is a property of
// the chip design and is identical across all banks.
class IsolationMap {
 public:
  IsolationMap() = default;
  IsolationMap(std::int32_t subarrays, std::string description);

  // Open-bitline model: a subarray shares sense amplifiers with its immediate
  // neighbors, so isolated(i, j) iff |i - j| >= 2.
  static IsolationMap adjacent_share(std::int32_t subarrays);

  // Random symmetric map calibrated so the average fraction of isolated
  // partners per subarray is approximately `coverage` (default mirrors the
  // ~32% average measured on real chips).
  static IsolationMap target_coverage(std::int32_t subarrays, double coverage,
                                      std::uint64_t seed);

  static IsolationMap from_stream(std::istream& in);
  static IsolationMap load(const std::string& path);

  std::int32_t subarrays() const { return subarrays_; }
  const std::string& description() const { return description_; }

  bool isolated(SubarrayId a, SubarrayId b) const;
  void set_isolated(SubarrayId a, SubarrayId b, bool value);

  // Subarrays isolated from `a`, ascending.
  std::vector<SubarrayId> partners(SubarrayId a) const;

  // Average over subarrays of (isolated partners) / (subarrays - 1);
  // 0 when the map has a single subarray.
  double average_coverage() const;

  // Throws if the stored relation lost symmetry or irreflexivity (used by
  // tests and after every construction path).
  void check_invariants() const;

  void save(std::ostream& out) const;
  void save(const std::string& path) const;

  bool operator==(const IsolationMap& other) const {
    return subarrays_ == other.subarrays_ && bits_ == other.bits_;
  }

 private:
  std::size_t index(SubarrayId a, SubarrayId b) const;

  std::int32_t subarrays_ = 0;
  std::string description_;
  std::vector<bool> bits_;
};

}  // namespace hira
