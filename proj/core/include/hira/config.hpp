#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hira/dram_core.hpp"
#include "hira/geometry.hpp"
#include "hira/scheduler.hpp"
#include "hira/timing.hpp"
#include "hira/trace.hpp"

namespace hira {

enum class IsolationStrategy { AdjacentShare, TargetCoverage, File };

struct IsolationConfig {
  IsolationStrategy strategy = IsolationStrategy::AdjacentShare;
  double coverage = 0.32;  // target-coverage strategy
  std::uint64_t seed = 7;
  std::string file;

  IsolationMap build(const Geometry& geom) const;
};

struct TraceSourceConfig {
  TraceGenParams gen;
  std::uint64_t seed = 1;
  std::string file;  // non-empty: load instead of generating
};

// RowHammer-analysis inputs used when the scheduler's p_th is auto-solved.
struct ParaConfig {
  std::int64_t n_rh = 9600;
  double target_p_rh = 1e-15;
};

struct RunConfig {
  picoseconds duration = 0;  // 0: run until the demand trace drains
  picoseconds drain_limit = 0;  // 0: duration-based default
  bool strict = true;           // abort on corruption/retention/deadline
  std::string event_log_path;   // empty: no log file
  std::string ground_truth_dump_path;  // empty: no post-run state dump
};

struct ExperimentConfig {
  Geometry geometry;
  TimingParams timing;
  ElectricalWindows electrical;
  GroundTruthConfig ground_truth;
  bool retention_grace_auto = true;  // derive from scheduler slack and cadence
  SchedulerConfig scheduler;
  bool p_th_auto = false;  // solve p_th from [para] inputs
  ParaConfig para;
  IsolationConfig isolation;
  std::vector<TraceSourceConfig> traces;
  RunConfig run;

  void validate() const;
};

// Sectioned key-value text: "[section]" headers, "key = value" entries, '#'
// comments. Unknown sections or keys are rejected with the line number; an
// empty file yields the full defaults (DDR4 timing, 16 banks, HiRA-2).
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_string(const std::string& text);

}  // namespace hira
