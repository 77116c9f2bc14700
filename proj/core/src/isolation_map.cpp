#include "hira/isolation_map.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hira/rng.hpp"

namespace hira {

IsolationMap::IsolationMap(std::int32_t subarrays, std::string description)
    : subarrays_(subarrays), description_(std::move(description)) {
  if (subarrays <= 0) throw std::invalid_argument("subarrays must be positive");
  bits_.assign(static_cast<std::size_t>(subarrays) * subarrays, false);
}

std::size_t IsolationMap::index(SubarrayId a, SubarrayId b) const {
  if (a < 0 || b < 0 || a >= subarrays_ || b >= subarrays_)
    throw std::out_of_range("subarray index out of range");
  return static_cast<std::size_t>(a) * subarrays_ + b;
}

bool IsolationMap::isolated(SubarrayId a, SubarrayId b) const {
  return bits_[index(a, b)];
}

void IsolationMap::set_isolated(SubarrayId a, SubarrayId b, bool value) {
  if (a == b && value)
    throw std::invalid_argument("a subarray cannot be isolated from itself");
  bits_[index(a, b)] = value;
  bits_[index(b, a)] = value;
}

std::vector<SubarrayId> IsolationMap::partners(SubarrayId a) const {
  std::vector<SubarrayId> out;
  for (SubarrayId b = 0; b < subarrays_; ++b)
    if (isolated(a, b)) out.push_back(b);
  return out;
}

double IsolationMap::average_coverage() const {
  if (subarrays_ <= 1) return 0.0;
  std::int64_t isolated_pairs = 0;
  for (SubarrayId a = 0; a < subarrays_; ++a)
    for (SubarrayId b = 0; b < subarrays_; ++b)
      if (isolated(a, b)) ++isolated_pairs;
  return static_cast<double>(isolated_pairs) /
         (static_cast<double>(subarrays_) * (subarrays_ - 1));
}

void IsolationMap::check_invariants() const {
  for (SubarrayId a = 0; a < subarrays_; ++a) {
    if (bits_[index(a, a)])
      throw std::logic_error("isolation map is not irreflexive");
    for (SubarrayId b = 0; b < subarrays_; ++b)
      if (bits_[index(a, b)] != bits_[index(b, a)])
        throw std::logic_error("isolation map is not symmetric");
  }
}

IsolationMap IsolationMap::adjacent_share(std::int32_t subarrays) {
  IsolationMap m(subarrays, "adjacent-share");
  for (SubarrayId a = 0; a < subarrays; ++a)
    for (SubarrayId b = a + 2; b < subarrays; ++b) m.set_isolated(a, b, true);
  m.check_invariants();
  return m;
}

IsolationMap IsolationMap::target_coverage(std::int32_t subarrays,
                                           double coverage,
                                           std::uint64_t seed) {
  if (coverage < 0.0 || coverage > 1.0)
    throw std::invalid_argument("coverage must be in [0, 1]");
  std::ostringstream desc;
  desc << "target-coverage f=" << coverage << " seed=" << seed;
  IsolationMap m(subarrays, desc.str());
  Rng rng(seed);
  for (SubarrayId a = 0; a < subarrays; ++a)
    for (SubarrayId b = a + 1; b < subarrays; ++b)
      if (rng.next_bool(coverage)) m.set_isolated(a, b, true);
  m.check_invariants();
  return m;
}

// File format: header "subarrays N", then one "i j" line per isolated pair
// (unordered; each pair listed once). '#' starts a comment.
IsolationMap IsolationMap::from_stream(std::istream& in) {
  std::string line;
  std::int32_t subarrays = -1;
  IsolationMap m;
  bool have_header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    if (!have_header) {
      std::string word;
      if (!(ls >> word)) continue;  // blank line before header
      if (word != "subarrays" || !(ls >> subarrays) || subarrays <= 0)
        throw std::runtime_error("isolation map line " + std::to_string(lineno) +
                                 ": expected header 'subarrays N'");
      m = IsolationMap(subarrays, "file");
      have_header = true;
      continue;
    }
    std::int32_t a, b;
    if (!(ls >> a)) continue;  // blank line
    if (!(ls >> b))
      throw std::runtime_error("isolation map line " + std::to_string(lineno) +
                               ": expected 'i j'");
    m.set_isolated(a, b, true);
  }
  if (!have_header) throw std::runtime_error("isolation map: missing header");
  m.check_invariants();
  return m;
}

IsolationMap IsolationMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open isolation map: " + path);
  return from_stream(in);
}

void IsolationMap::save(std::ostream& out) const {
  out << "subarrays " << subarrays_ << "\n";
  for (SubarrayId a = 0; a < subarrays_; ++a)
    for (SubarrayId b = a + 1; b < subarrays_; ++b)
      if (isolated(a, b)) out << a << ' ' << b << "\n";
}

void IsolationMap::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write isolation map: " + path);
  save(out);
}

}  // namespace hira
