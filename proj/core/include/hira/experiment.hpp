#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hira/config.hpp"
#include "hira/scheduler.hpp"

namespace hira {

struct SourceMetrics {
  std::int64_t injected = 0;
  std::int64_t served = 0;
  std::int64_t in_flight = 0;
  double throughput = 0.0;       // served per controller cycle
  double solo_throughput = 0.0;  // same source alone, no refresh
  double speedup = 0.0;          // throughput / solo_throughput
  picoseconds avg_latency = 0;
};

struct MetricsReport {
  picoseconds duration = 0;
  bool drained = false;
  std::vector<SourceMetrics> sources;
  double weighted_speedup = 0.0;

  std::int64_t hira_ra = 0;
  std::int64_t hira_rr = 0;
  std::int64_t standalone_refreshes = 0;
  std::int64_t refs = 0;
  std::int64_t periodic_generated = 0;
  std::int64_t preventive_generated = 0;

  std::int64_t deadline_violations = 0;
  std::int64_t tfaw_violations = 0;
  std::int64_t retention_expiries = 0;
  std::int64_t corrupted_rows = 0;
  std::int64_t partial_restores = 0;
  std::int64_t bit_flips = 0;
  std::size_t refresh_table_peak = 0;
  picoseconds max_restore_gap = 0;
  picoseconds retention_bound = 0;  // tREFW + applied grace

  picoseconds tfaw_stall = 0;
  double bus_occupancy = 0.0;  // busy command-bus time / elapsed, per channel

  double p_th_used = 0.0;
};

// Raised in strict runs when the ground truth reports corruption, retention
// expiry, or a missed refresh deadline.
struct SimulationInvariantError : std::runtime_error {
  explicit SimulationInvariantError(const std::string& what)
      : std::runtime_error(what) {}
  MetricsReport report;
};

// Builds one chip + controller per channel, replays the configured traces,
// and collects metrics. Deterministic for a fixed config: identical seeds
// give byte-identical event logs and metrics.
MetricsReport run_experiment(const ExperimentConfig& cfg);

void write_metrics_csv(const MetricsReport& m, std::ostream& out);

enum class SweepAxis { Capacity, NRh, Channels, Ranks, Slack };
SweepAxis sweep_axis_from_string(const std::string& s);

struct SweepPoint {
  std::int64_t value = 0;
  bool failed = false;
  std::string error;
  MetricsReport baseline;  // BaselineRef on the same trace
  MetricsReport hira;      // the configured (HiRA) scheduler
};

// One run_experiment per axis value (baseline and HiRA variants share the
// trace and seeds); per-point failures are reported and the sweep continues.
std::vector<SweepPoint> run_sweep(SweepAxis axis,
                                  const std::vector<std::int64_t>& values,
                                  const ExperimentConfig& base);

void write_sweep_csv(SweepAxis axis, const std::vector<SweepPoint>& points,
                     std::ostream& out);

}  // namespace hira
