#include "hira/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hira {

IsolationMap IsolationConfig::build(const Geometry& geom) const {
  switch (strategy) {
    case IsolationStrategy::AdjacentShare:
      return IsolationMap::adjacent_share(
          static_cast<std::int32_t>(geom.subarrays_per_bank));
    case IsolationStrategy::TargetCoverage:
      return IsolationMap::target_coverage(
          static_cast<std::int32_t>(geom.subarrays_per_bank), coverage, seed);
    case IsolationStrategy::File:
      return IsolationMap::load(file);
  }
  throw std::logic_error("unreachable");
}

void ExperimentConfig::validate() const {
  geometry.validate();
  timing.validate();
  if (scheduler.p_th < 0.0 || scheduler.p_th > 1.0)
    throw std::invalid_argument("p_th must be in [0, 1]");
  if (run.duration < 0) throw std::invalid_argument("duration must be >= 0");
  if (isolation.strategy == IsolationStrategy::File && isolation.file.empty())
    throw std::invalid_argument("isolation strategy 'file' needs a path");
  if (isolation.coverage < 0.0 || isolation.coverage > 1.0)
    throw std::invalid_argument("isolation coverage must be in [0, 1]");
}

namespace {

struct ConfigError : std::runtime_error {
  ConfigError(int line, const std::string& what)
      : std::runtime_error("config line " + std::to_string(line) + ": " + what) {}
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigError(line, "expected a boolean, got '" + v + "'");
}

std::int64_t parse_int(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const std::int64_t x = std::stoll(v, &pos, 0);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(line, "expected an integer, got '" + v + "'");
  }
}

double parse_double(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(line, "expected a number, got '" + v + "'");
  }
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string section;
  int trace_index = -1;
  std::string line;
  int lineno = 0;

  auto set_key = [&](const std::string& key, const std::string& value) {
    const int ln = lineno;
    auto geom_key = [&]() -> bool {
      auto& g = cfg.geometry;
      if (key == "channels") g.channels = parse_int(value, ln);
      else if (key == "ranks_per_channel") g.ranks_per_channel = parse_int(value, ln);
      else if (key == "banks_per_rank") g.banks_per_rank = parse_int(value, ln);
      else if (key == "subarrays_per_bank") g.subarrays_per_bank = parse_int(value, ln);
      else if (key == "rows_per_subarray") g.rows_per_subarray = parse_int(value, ln);
      else if (key == "columns_per_row") g.columns_per_row = parse_int(value, ln);
      else if (key == "address_order") {
        if (value == "row") g.order = AddressOrder::RowInterleaved;
        else if (value == "bank") g.order = AddressOrder::BankInterleaved;
        else throw ConfigError(ln, "address_order must be 'row' or 'bank'");
      } else return false;
      return true;
    };
    auto timing_key = [&]() -> bool {
      auto& t = cfg.timing;
      if (key == "trcd_ps") t.tRCD = parse_int(value, ln);
      else if (key == "tras_ps") t.tRAS = parse_int(value, ln);
      else if (key == "trp_ps") t.tRP = parse_int(value, ln);
      else if (key == "trc_ps") t.tRC = parse_int(value, ln);
      else if (key == "trfc_ps") t.tRFC = parse_int(value, ln);
      else if (key == "trefi_ps") t.tREFI = parse_int(value, ln);
      else if (key == "trefw_ps") t.tREFW = parse_int(value, ln);
      else if (key == "tfaw_ps") t.tFAW = parse_int(value, ln);
      else return false;
      return true;
    };
    auto sched_key = [&]() -> bool {
      auto& s = cfg.scheduler;
      if (key == "mode") {
        if (value == "hira") s.mode = SchedulerMode::Hira;
        else if (value == "baseline_ref") s.mode = SchedulerMode::BaselineRef;
        else if (value == "no_refresh") s.mode = SchedulerMode::NoRefresh;
        else throw ConfigError(ln, "mode must be hira|baseline_ref|no_refresh");
      } else if (key == "slack_multiple") {
        s.slack_multiple = static_cast<int>(parse_int(value, ln));
      } else if (key == "para") {
        s.para_enabled = parse_bool(value, ln);
      } else if (key == "p_th") {
        if (value == "auto") cfg.p_th_auto = true;
        else s.p_th = parse_double(value, ln);
      } else if (key == "preventive_policy") {
        if (value == "queued") s.preventive_policy = PreventivePolicy::Queued;
        else if (value == "immediate") s.preventive_policy = PreventivePolicy::Immediate;
        else throw ConfigError(ln, "preventive_policy must be queued|immediate");
      } else if (key == "rng_seed") {
        s.rng_seed = static_cast<std::uint64_t>(parse_int(value, ln));
      } else if (key == "refresh_table_capacity") {
        s.refresh_table_capacity = static_cast<std::size_t>(parse_int(value, ln));
      } else if (key == "pr_fifo_capacity") {
        s.pr_fifo_capacity = static_cast<std::size_t>(parse_int(value, ln));
      } else if (key == "queue_depth") {
        s.queue_depth = static_cast<std::size_t>(parse_int(value, ln));
      } else if (key == "command_slot_ps") {
        s.command_slot = parse_int(value, ln);
      } else if (key == "hira_t1_ps") {
        s.hira_t1 = parse_int(value, ln);
      } else if (key == "hira_t2_ps") {
        s.hira_t2 = parse_int(value, ln);
      } else {
        return false;
      }
      return true;
    };
    auto electrical_key = [&]() -> bool {
      auto& e = cfg.electrical;
      if (key == "sense_enable_min_ps") e.sense_enable_min = parse_int(value, ln);
      else if (key == "wordline_disable_max_ps") e.wordline_disable_max = parse_int(value, ln);
      else if (key == "bankio_disconnect_min_ps") e.bankio_disconnect_min = parse_int(value, ln);
      else return false;
      return true;
    };
    auto gt_key = [&]() -> bool {
      if (key == "n_rh_true") {
        cfg.ground_truth.n_rh_true = static_cast<std::uint64_t>(parse_int(value, ln));
      } else if (key == "retention_grace_ps") {
        if (value == "auto") {
          cfg.retention_grace_auto = true;
        } else {
          cfg.retention_grace_auto = false;
          cfg.ground_truth.retention_grace = parse_int(value, ln);
        }
      } else {
        return false;
      }
      return true;
    };
    auto isolation_key = [&]() -> bool {
      auto& i = cfg.isolation;
      if (key == "strategy") {
        if (value == "adjacent_share") i.strategy = IsolationStrategy::AdjacentShare;
        else if (value == "target_coverage") i.strategy = IsolationStrategy::TargetCoverage;
        else if (value == "file") i.strategy = IsolationStrategy::File;
        else throw ConfigError(ln, "strategy must be adjacent_share|target_coverage|file");
      } else if (key == "coverage") {
        i.coverage = parse_double(value, ln);
      } else if (key == "seed") {
        i.seed = static_cast<std::uint64_t>(parse_int(value, ln));
      } else if (key == "file") {
        i.file = value;
      } else {
        return false;
      }
      return true;
    };
    auto para_key = [&]() -> bool {
      if (key == "n_rh") cfg.para.n_rh = parse_int(value, ln);
      else if (key == "target_p_rh") cfg.para.target_p_rh = parse_double(value, ln);
      else return false;
      return true;
    };
    auto run_key = [&]() -> bool {
      if (key == "duration_ps") cfg.run.duration = parse_int(value, ln);
      else if (key == "drain_limit_ps") cfg.run.drain_limit = parse_int(value, ln);
      else if (key == "strict") cfg.run.strict = parse_bool(value, ln);
      else if (key == "event_log") cfg.run.event_log_path = value;
      else if (key == "ground_truth_dump") cfg.run.ground_truth_dump_path = value;
      else return false;
      return true;
    };
    auto trace_key = [&]() -> bool {
      auto& t = cfg.traces[static_cast<std::size_t>(trace_index)];
      if (key == "kind") t.gen.kind = trace_kind_from_string(value);
      else if (key == "count") t.gen.count = parse_int(value, ln);
      else if (key == "gap_cycles") t.gen.gap = parse_int(value, ln);
      else if (key == "write_fraction") t.gen.write_fraction = parse_double(value, ln);
      else if (key == "burst") t.gen.burst = parse_int(value, ln);
      else if (key == "seed") t.seed = static_cast<std::uint64_t>(parse_int(value, ln));
      else if (key == "file") t.file = value;
      else if (key == "hammer_rank") t.gen.hammer_rank = static_cast<RankId>(parse_int(value, ln));
      else if (key == "hammer_bank") t.gen.hammer_bank = static_cast<BankId>(parse_int(value, ln));
      else if (key == "hammer_victim") t.gen.hammer_victim = parse_int(value, ln);
      else return false;
      return true;
    };

    bool handled = false;
    if (section == "geometry") handled = geom_key();
    else if (section == "timing") handled = timing_key();
    else if (section == "scheduler") handled = sched_key();
    else if (section == "electrical") handled = electrical_key();
    else if (section == "ground_truth") handled = gt_key();
    else if (section == "isolation") handled = isolation_key();
    else if (section == "para") handled = para_key();
    else if (section == "run") handled = run_key();
    else if (section.rfind("trace", 0) == 0) handled = trace_key();
    else throw ConfigError(ln, "unknown section '" + section + "'");
    if (!handled)
      throw ConfigError(ln, "unknown key '" + key + "' in section '" + section + "'");
  };

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(lineno, "unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.rfind("trace", 0) == 0) {
        cfg.traces.emplace_back();
        ++trace_index;
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(lineno, "expected 'key = value'");
    if (section.empty())
      throw ConfigError(lineno, "key outside of any [section]");
    set_key(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }

  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("config constraint violation: ") +
                             e.what());
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  return parse_config(in);
}

ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace hira
