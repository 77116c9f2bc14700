#include "hira/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hira/para_analysis.hpp"

namespace hira {

namespace {

struct RoutedRequest {
  picoseconds arrival = 0;
  std::uint64_t order = 0;  // global tie-break
  int source = 0;
  bool is_write = false;
  DramAddress addr;
};

// Expand per-source gap-encoded traces into absolute arrivals and route them
// to channels.
std::vector<std::vector<RoutedRequest>> route_traces(
    const ExperimentConfig& cfg, const std::vector<std::vector<TraceRequest>>& traces) {
  std::vector<std::vector<RoutedRequest>> per_channel(
      static_cast<std::size_t>(cfg.geometry.channels));
  std::uint64_t order = 0;
  for (std::size_t s = 0; s < traces.size(); ++s) {
    picoseconds t = 0;
    for (const auto& req : traces[s]) {
      t += req.gap * cfg.scheduler.command_slot;
      RoutedRequest r;
      r.arrival = t;
      r.order = order++;
      r.source = static_cast<int>(s);
      r.is_write = req.is_write;
      r.addr = cfg.geometry.decode(req.address);
      per_channel[static_cast<std::size_t>(r.addr.channel)].push_back(r);
    }
  }
  for (auto& ch : per_channel)
    std::sort(ch.begin(), ch.end(), [](const RoutedRequest& a, const RoutedRequest& b) {
      if (a.arrival != b.arrival) return a.arrival < b.arrival;
      return a.order < b.order;
    });
  return per_channel;
}

picoseconds auto_retention_grace(const ExperimentConfig& cfg,
                                 picoseconds duration_hint) {
  if (cfg.scheduler.mode == SchedulerMode::NoRefresh) {
    // The ideal anchor performs no refresh at all; retention is not the
    // property under test there.
    return duration_hint + cfg.timing.tREFW;
  }
  // Deadline slack plus bounded refresh-pointer skew (HiRA mode) and REF
  // batching jitter (baseline): restores may trail their nominal once-per-
  // window instants by this much.
  const picoseconds period_bank = cfg.timing.tREFW / cfg.geometry.rows_per_bank();
  return cfg.scheduler.refresh_slack(cfg.timing) + 2 * period_bank +
         cfg.timing.tREFI + cfg.timing.tRFC;
}

struct RunOutput {
  std::vector<SourceMetrics> sources;
  picoseconds duration = 0;
  bool drained = true;
  SchedulerStats sched;
  ChipStats chip;
  std::size_t table_peak = 0;
  picoseconds max_gap = 0;
  picoseconds bus_busy = 0;
};

RunOutput run_once(const ExperimentConfig& cfg, double p_th,
                   const IsolationMap& map,
                   const std::vector<std::vector<RoutedRequest>>& per_channel,
                   std::size_t n_sources, std::ostream* log_out) {
  GroundTruthConfig gt = cfg.ground_truth;
  if (cfg.retention_grace_auto)
    gt.retention_grace = auto_retention_grace(cfg, cfg.run.duration);

  SchedulerConfig sched = cfg.scheduler;
  sched.p_th = p_th;

  std::vector<std::unique_ptr<DramChip>> chips;
  std::vector<std::unique_ptr<Controller>> ctrls;
  EventLog log(log_out);
  for (std::int64_t ch = 0; ch < cfg.geometry.channels; ++ch) {
    chips.push_back(std::make_unique<DramChip>(cfg.geometry, cfg.timing, map,
                                               cfg.electrical, gt));
    SchedulerConfig per = sched;
    per.rng_seed = sched.rng_seed + static_cast<std::uint64_t>(ch) * 0x9e3779b9ULL;
    ctrls.push_back(std::make_unique<Controller>(
        *chips.back(), per, (ch == 0 && log_out) ? &log : nullptr));
  }
  for (std::size_t ch = 0; ch < per_channel.size(); ++ch)
    for (const auto& r : per_channel[ch])
      ctrls[ch]->add_request(r.source, r.is_write, r.addr, r.arrival);

  const picoseconds drain_limit =
      cfg.run.drain_limit > 0
          ? cfg.run.drain_limit
          : std::max<picoseconds>(10 * cfg.run.duration, 100000000000);

  RunOutput out;
  out.drained = true;
  for (auto& c : ctrls) {
    if (cfg.run.duration > 0) {
      c->run_until(cfg.run.duration);
      out.drained = out.drained && c->demand_drained();
      out.duration = std::max(out.duration, cfg.run.duration);
    } else {
      const picoseconds end = c->run_to_drain(drain_limit);
      out.drained = out.drained && c->demand_drained();
      out.duration = std::max(out.duration, end);
    }
  }

  out.sources.resize(n_sources);
  for (auto& c : ctrls) {
    const auto& st = c->stats();
    for (std::size_t s = 0; s < st.sources.size() && s < n_sources; ++s) {
      out.sources[s].injected += st.sources[s].injected;
      out.sources[s].served += st.sources[s].served;
      out.sources[s].avg_latency += st.sources[s].latency_sum;  // sum for now
    }
    out.sched.hira_ra += st.hira_ra;
    out.sched.hira_rr += st.hira_rr;
    out.sched.standalone_refreshes += st.standalone_refreshes;
    out.sched.refs += st.refs;
    out.sched.periodic_generated += st.periodic_generated;
    out.sched.preventive_generated += st.preventive_generated;
    out.sched.deadline_violations += st.deadline_violations;
    out.sched.tfaw_stall += st.tfaw_stall;
    out.table_peak = std::max(out.table_peak, st.refresh_table_peak);
    out.bus_busy += st.bus_busy;
  }
  if (!cfg.run.ground_truth_dump_path.empty()) {
    std::ofstream dump(cfg.run.ground_truth_dump_path);
    if (!dump)
      throw std::runtime_error("cannot write ground-truth dump: " +
                               cfg.run.ground_truth_dump_path);
    for (std::size_t ch = 0; ch < chips.size(); ++ch)
      for (RankId r = 0; r < cfg.geometry.ranks_per_channel; ++r) {
        dump << "# channel " << ch << " rank " << r << "\n";
        chips[ch]->dump_ground_truth(r, dump);
      }
  }
  for (auto& chip : chips) {
    if (cfg.scheduler.mode != SchedulerMode::NoRefresh)
      chip->check_retention(out.duration);
    const auto& cs = chip->stats();
    out.chip.tfaw_violations += cs.tfaw_violations;
    out.chip.bit_flips += cs.bit_flips;
    out.chip.corrupted_rows += cs.corrupted_rows;
    out.chip.partial_restores += cs.partial_restores;
    out.chip.retention_expiries += cs.retention_expiries;
    out.max_gap = std::max(out.max_gap, chip->max_restore_gap(out.duration));
  }
  for (auto& s : out.sources) {
    if (s.served > 0) s.avg_latency /= s.served;
    s.in_flight = s.injected - s.served;
    if (out.duration > 0)
      s.throughput = static_cast<double>(s.served) * cfg.scheduler.command_slot /
                     static_cast<double>(out.duration);
  }
  return out;
}

}  // namespace

MetricsReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.run.event_log_path.empty() && cfg.geometry.channels != 1)
    throw std::invalid_argument("event log capture requires channels = 1");

  double p_th = cfg.scheduler.p_th;
  if (cfg.p_th_auto && cfg.scheduler.para_enabled) {
    ParaParams pp;
    pp.n_rh = cfg.para.n_rh;
    pp.t_refw = cfg.timing.tREFW;
    pp.t_rc = cfg.timing.tRC;
    pp.refresh_slack = cfg.scheduler.refresh_slack(cfg.timing);
    pp.target_p_rh = cfg.para.target_p_rh;
    const ParaSolution sol = solve_p_th(pp);
    if (!sol.reachable)
      throw std::runtime_error("p_th auto-solve: target unreachable even at p_th = 1");
    p_th = sol.p_th;
  }

  const IsolationMap map = cfg.isolation.build(cfg.geometry);

  // Materialize traces.
  std::vector<std::vector<TraceRequest>> traces;
  for (const auto& ts : cfg.traces) {
    if (!ts.file.empty())
      traces.push_back(load_trace(ts.file));
    else
      traces.push_back(generate_trace(ts.gen, cfg.geometry, ts.seed));
  }
  const std::size_t n_sources = traces.size();
  const auto per_channel = route_traces(cfg, traces);

  // Solo no-refresh runs, one per source, for the weighted-speedup baseline.
  std::vector<double> solo_tput(n_sources, 0.0);
  for (std::size_t s = 0; s < n_sources; ++s) {
    if (traces[s].empty()) continue;
    ExperimentConfig solo = cfg;
    solo.scheduler.mode = SchedulerMode::NoRefresh;
    solo.scheduler.para_enabled = false;
    solo.run.duration = 0;  // drain
    solo.run.event_log_path.clear();
    std::vector<std::vector<TraceRequest>> one;
    for (std::size_t k = 0; k < n_sources; ++k)
      one.push_back(k == s ? traces[k] : std::vector<TraceRequest>{});
    const auto routed = route_traces(solo, one);
    const RunOutput r = run_once(solo, 0.0, map, routed, n_sources, nullptr);
    solo_tput[s] = r.sources[s].throughput;
  }

  std::ofstream log_file;
  std::ostream* log_out = nullptr;
  if (!cfg.run.event_log_path.empty()) {
    log_file.open(cfg.run.event_log_path);
    if (!log_file)
      throw std::runtime_error("cannot write event log: " + cfg.run.event_log_path);
    EventLog::write_header(log_file);
    log_out = &log_file;
  }

  const RunOutput r = run_once(cfg, p_th, map, per_channel, n_sources, log_out);

  MetricsReport m;
  m.duration = r.duration;
  m.drained = r.drained;
  m.sources = r.sources;
  for (std::size_t s = 0; s < n_sources; ++s) {
    m.sources[s].solo_throughput = solo_tput[s];
    if (solo_tput[s] > 0.0) {
      m.sources[s].speedup = m.sources[s].throughput / solo_tput[s];
      m.weighted_speedup += m.sources[s].speedup;
    }
  }
  m.hira_ra = r.sched.hira_ra;
  m.hira_rr = r.sched.hira_rr;
  m.standalone_refreshes = r.sched.standalone_refreshes;
  m.refs = r.sched.refs;
  m.periodic_generated = r.sched.periodic_generated;
  m.preventive_generated = r.sched.preventive_generated;
  m.deadline_violations = r.sched.deadline_violations;
  m.tfaw_violations = r.chip.tfaw_violations;
  m.retention_expiries = r.chip.retention_expiries;
  m.corrupted_rows = r.chip.corrupted_rows;
  m.partial_restores = r.chip.partial_restores;
  m.bit_flips = r.chip.bit_flips;
  m.refresh_table_peak = r.table_peak;
  m.max_restore_gap = r.max_gap;
  {
    GroundTruthConfig gt = cfg.ground_truth;
    if (cfg.retention_grace_auto)
      gt.retention_grace = auto_retention_grace(cfg, cfg.run.duration);
    m.retention_bound = cfg.timing.tREFW + gt.retention_grace;
  }
  m.tfaw_stall = r.sched.tfaw_stall;
  if (r.duration > 0)
    m.bus_occupancy = static_cast<double>(r.bus_busy) /
                      (static_cast<double>(r.duration) * cfg.geometry.channels);
  m.p_th_used = p_th;

  if (cfg.run.strict) {
    std::ostringstream why;
    if (m.corrupted_rows > 0) why << "corrupted rows: " << m.corrupted_rows << "; ";
    if (m.partial_restores > 0)
      why << "partial restores: " << m.partial_restores << "; ";
    if (m.retention_expiries > 0)
      why << "retention expiries: " << m.retention_expiries << "; ";
    if (m.deadline_violations > 0)
      why << "refresh deadline violations: " << m.deadline_violations << "; ";
    if (m.tfaw_violations > 0)
      why << "tFAW violations: " << m.tfaw_violations << "; ";
    const std::string s = why.str();
    if (!s.empty()) {
      SimulationInvariantError err("simulation invariant violated: " + s);
      err.report = m;
      throw err;
    }
  }
  return m;
}

void write_metrics_csv(const MetricsReport& m, std::ostream& out) {
  out << "# hira metrics v1\n";
  out << "metric,value\n";
  out << "duration_ps," << m.duration << '\n';
  out << "drained," << (m.drained ? 1 : 0) << '\n';
  out << "weighted_speedup," << m.weighted_speedup << '\n';
  out << "hira_ra," << m.hira_ra << '\n';
  out << "hira_rr," << m.hira_rr << '\n';
  out << "standalone_refreshes," << m.standalone_refreshes << '\n';
  out << "refs," << m.refs << '\n';
  out << "periodic_generated," << m.periodic_generated << '\n';
  out << "preventive_generated," << m.preventive_generated << '\n';
  out << "deadline_violations," << m.deadline_violations << '\n';
  out << "tfaw_violations," << m.tfaw_violations << '\n';
  out << "retention_expiries," << m.retention_expiries << '\n';
  out << "corrupted_rows," << m.corrupted_rows << '\n';
  out << "partial_restores," << m.partial_restores << '\n';
  out << "bit_flips," << m.bit_flips << '\n';
  out << "refresh_table_peak," << m.refresh_table_peak << '\n';
  out << "max_restore_gap_ps," << m.max_restore_gap << '\n';
  out << "retention_bound_ps," << m.retention_bound << '\n';
  out << "tfaw_stall_ps," << m.tfaw_stall << '\n';
  out << "bus_occupancy," << m.bus_occupancy << '\n';
  out << "p_th," << m.p_th_used << '\n';
  out << "source,injected,served,in_flight,throughput,solo_throughput,speedup,"
         "avg_latency_ps\n";
  for (std::size_t s = 0; s < m.sources.size(); ++s) {
    const auto& src = m.sources[s];
    out << s << ',' << src.injected << ',' << src.served << ',' << src.in_flight
        << ',' << src.throughput << ',' << src.solo_throughput << ','
        << src.speedup << ',' << src.avg_latency << '\n';
  }
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "capacity") return SweepAxis::Capacity;
  if (s == "n_rh") return SweepAxis::NRh;
  if (s == "channels") return SweepAxis::Channels;
  if (s == "ranks") return SweepAxis::Ranks;
  if (s == "slack") return SweepAxis::Slack;
  throw std::invalid_argument("unknown sweep axis: " + s);
}

namespace {
const char* axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::Capacity: return "capacity_rows_per_subarray";
    case SweepAxis::NRh: return "n_rh";
    case SweepAxis::Channels: return "channels";
    case SweepAxis::Ranks: return "ranks";
    case SweepAxis::Slack: return "slack_multiple";
  }
  return "?";
}

ExperimentConfig apply_axis(SweepAxis axis, std::int64_t value,
                            const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  switch (axis) {
    case SweepAxis::Capacity: {
      // Capacity proxy: more rows per bank, with the REF batch window scaled
      // in proportion (denser chips refresh more rows per REF command).
      if (value <= 0) throw std::invalid_argument("capacity value must be > 0");
      const double scale = static_cast<double>(value) /
                           static_cast<double>(base.geometry.rows_per_subarray);
      cfg.geometry.rows_per_subarray = value;
      cfg.timing.tRFC = std::max<picoseconds>(
          1, static_cast<picoseconds>(static_cast<double>(base.timing.tRFC) * scale));
      if (cfg.timing.tRFC >= cfg.timing.tREFI)
        cfg.timing.tRFC = cfg.timing.tREFI - 1;
      break;
    }
    case SweepAxis::NRh:
      cfg.para.n_rh = value;
      cfg.p_th_auto = true;
      break;
    case SweepAxis::Channels:
      cfg.geometry.channels = value;
      break;
    case SweepAxis::Ranks:
      cfg.geometry.ranks_per_channel = value;
      break;
    case SweepAxis::Slack:
      cfg.scheduler.slack_multiple = static_cast<int>(value);
      break;
  }
  return cfg;
}
}  // namespace

std::vector<SweepPoint> run_sweep(SweepAxis axis,
                                  const std::vector<std::int64_t>& values,
                                  const ExperimentConfig& base) {
  std::vector<SweepPoint> points;
  for (std::int64_t v : values) {
    SweepPoint p;
    p.value = v;
    try {
      ExperimentConfig hira_cfg = apply_axis(axis, v, base);
      hira_cfg.run.event_log_path.clear();
      ExperimentConfig base_cfg = hira_cfg;
      base_cfg.scheduler.mode = SchedulerMode::BaselineRef;
      p.hira = run_experiment(hira_cfg);
      p.baseline = run_experiment(base_cfg);
    } catch (const std::exception& e) {
      p.failed = true;
      p.error = e.what();
    }
    points.push_back(std::move(p));
  }
  return points;
}

void write_sweep_csv(SweepAxis axis, const std::vector<SweepPoint>& points,
                     std::ostream& out) {
  out << "# hira sweep v1 axis=" << axis_name(axis) << "\n";
  out << "value,baseline_ws,hira_ws,improvement,baseline_refs,hira_ra,hira_rr,"
         "standalone,periodic_generated,preventive_generated,"
         "baseline_bus_occupancy,hira_bus_occupancy,error\n";
  for (const auto& p : points) {
    if (p.failed) {
      out << p.value << ",,,,,,,,,,,," << p.error << '\n';
      continue;
    }
    const double improvement =
        p.baseline.weighted_speedup > 0
            ? p.hira.weighted_speedup / p.baseline.weighted_speedup - 1.0
            : 0.0;
    out << p.value << ',' << p.baseline.weighted_speedup << ','
        << p.hira.weighted_speedup << ',' << improvement << ','
        << p.baseline.refs << ',' << p.hira.hira_ra << ',' << p.hira.hira_rr
        << ',' << p.hira.standalone_refreshes << ','
        << p.hira.periodic_generated << ',' << p.hira.preventive_generated
        << ',' << p.baseline.bus_occupancy << ',' << p.hira.bus_occupancy
        << ",\n";
  }
}

}  // namespace hira
