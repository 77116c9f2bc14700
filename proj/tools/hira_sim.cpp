// Command-line front end: trace-driven simulation, evaluation sweeps, the
// coverage / threshold characterization experiments, and the PARA threshold
// solver.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hira/characterization.hpp"
#include "hira/config.hpp"
#include "hira/experiment.hpp"
#include "hira/para_analysis.hpp"

namespace {

hira::ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return hira::parse_config_string("");
  return hira::parse_config_file(path);
}

std::vector<std::int64_t> parse_int_list(const std::string& csv) {
  std::vector<std::int64_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoll(item));
  return out;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open output: " + path);
  return file;
}

int cmd_simulate(const std::string& config_path,
                 std::optional<std::int64_t> duration,
                 std::optional<std::string> mode,
                 std::optional<int> slack,
                 std::optional<std::uint64_t> seed,
                 const std::string& event_log,
                 const std::string& gt_dump,
                 const std::string& metrics_out) {
  hira::ExperimentConfig cfg = load_config(config_path);
  if (duration) cfg.run.duration = *duration;
  if (seed) cfg.scheduler.rng_seed = *seed;
  if (slack) cfg.scheduler.slack_multiple = *slack;
  if (mode) {
    if (*mode == "hira") cfg.scheduler.mode = hira::SchedulerMode::Hira;
    else if (*mode == "baseline_ref") cfg.scheduler.mode = hira::SchedulerMode::BaselineRef;
    else if (*mode == "no_refresh") cfg.scheduler.mode = hira::SchedulerMode::NoRefresh;
    else throw std::runtime_error("bad --mode");
  }
  if (!event_log.empty()) cfg.run.event_log_path = event_log;
  if (!gt_dump.empty()) cfg.run.ground_truth_dump_path = gt_dump;

  const hira::MetricsReport m = hira::run_experiment(cfg);
  std::ofstream file;
  hira::write_metrics_csv(m, open_out(file, metrics_out));
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::string& values, const std::string& out_path) {
  const hira::ExperimentConfig cfg = load_config(config_path);
  const auto ax = hira::sweep_axis_from_string(axis);
  const auto points = hira::run_sweep(ax, parse_int_list(values), cfg);
  std::ofstream file;
  hira::write_sweep_csv(ax, points, open_out(file, out_path));
  for (const auto& p : points)
    if (p.failed) return 1;
  return 0;
}

std::vector<hira::RowId> sample_rows(const hira::Geometry& g,
                                     const std::string& sample) {
  if (sample == "blocks") return hira::default_tested_rows(g);
  if (sample == "all") {
    std::vector<hira::RowId> rows;
    for (hira::RowId r = 0; r < g.rows_per_bank(); ++r) rows.push_back(r);
    return rows;
  }
  // one row per subarray
  std::vector<hira::RowId> rows;
  for (hira::SubarrayId sa = 0; sa < g.subarrays_per_bank; ++sa)
    rows.push_back(g.bank_row(sa, 0));
  return rows;
}

int cmd_coverage(const std::string& config_path, std::int64_t t1,
                 std::int64_t t2, bool grid, int bank,
                 const std::string& sample, const std::string& out_path,
                 const std::string& box_out_path) {
  hira::ExperimentConfig cfg = load_config(config_path);
  const hira::IsolationMap map = cfg.isolation.build(cfg.geometry);
  hira::DramChip chip(cfg.geometry, cfg.timing, map, cfg.electrical,
                      cfg.ground_truth);
  hira::CharacterizationHarness harness(chip);
  const auto rows = sample_rows(cfg.geometry, sample);

  std::vector<hira::CoverageReport> reports;
  std::vector<std::pair<std::int64_t, std::int64_t>> settings;
  if (grid) {
    for (std::int64_t a : {1500, 3000, 4500, 6000})
      for (std::int64_t b : {1500, 3000, 4500, 6000}) settings.push_back({a, b});
  } else {
    settings.push_back({t1, t2});
  }
  for (auto [a, b] : settings) {
    hira::HiraConfig hc;
    hc.t1 = a;
    hc.t2 = b;
    reports.push_back(harness.run_coverage(hc, 0, bank, rows,
                                           hira::default_patterns()));
  }

  std::ofstream file;
  std::ostream& out = open_out(file, out_path);
  for (const auto& r : reports) hira::write_coverage_csv(r, out);
  if (!box_out_path.empty()) {
    std::ofstream box_file;
    hira::write_box_summary_csv(reports, open_out(box_file, box_out_path));
  }
  return 0;
}

int cmd_threshold(const std::string& config_path, std::int64_t victim,
                  int bank, const std::string& out_path) {
  hira::ExperimentConfig cfg = load_config(config_path);
  const hira::IsolationMap map = cfg.isolation.build(cfg.geometry);
  hira::DramChip chip(cfg.geometry, cfg.timing, map, cfg.electrical,
                      cfg.ground_truth);
  hira::CharacterizationHarness harness(chip);

  hira::CharacterizationHarness::ThresholdOptions with;
  with.use_hira = true;
  auto without = with;
  without.use_hira = false;

  const auto w = harness.run_threshold(0, bank, victim, with);
  const auto wo = harness.run_threshold(0, bank, victim, without);
  if (w.corruption || wo.corruption) {
    std::cerr << "aborted: " << (w.corruption ? w.report : wo.report) << "\n";
    return 1;
  }
  if (!w.flipped || !wo.flipped) {
    std::cerr << "no bit flip up to the search bound\n";
    return 1;
  }

  hira::ThresholdReport report;
  hira::ThresholdMeasurement m;
  m.victim = victim;
  m.with_hira = w.threshold;
  m.without_hira = wo.threshold;
  m.ratio = static_cast<double>(w.threshold) / static_cast<double>(wo.threshold);
  report.measurements.push_back(m);

  std::ofstream file;
  hira::write_threshold_csv(report, open_out(file, out_path));
  return 0;
}

int cmd_para_solve(const std::string& config_path, const std::string& n_rh_csv,
                   const std::string& slack_csv, double target,
                   const std::string& out_path) {
  const hira::ExperimentConfig cfg = load_config(config_path);
  std::vector<int> slacks;
  for (std::int64_t v : parse_int_list(slack_csv))
    slacks.push_back(static_cast<int>(v));
  const auto rows =
      hira::para_sweep(parse_int_list(n_rh_csv), slacks, cfg.timing, target);
  std::ofstream file;
  open_out(file, out_path) << hira::para_sweep_csv(rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HiRA memory-subsystem simulator"};
  app.require_subcommand(1);

  std::string config_path, event_log, gt_dump, metrics_out = "-", out_path = "-";
  std::optional<std::int64_t> duration;
  std::optional<std::string> mode;
  std::optional<int> slack;
  std::optional<std::uint64_t> seed;

  auto* sim = app.add_subcommand("simulate", "run one trace-driven simulation");
  sim->add_option("--config", config_path, "experiment config file");
  sim->add_option("--duration-ps", duration, "override simulated duration");
  sim->add_option("--mode", mode, "hira|baseline_ref|no_refresh");
  sim->add_option("--slack", slack, "tRefSlack multiple (HiRA-N)");
  sim->add_option("--seed", seed, "scheduler RNG seed");
  sim->add_option("--event-log", event_log, "write the event-log CSV here");
  sim->add_option("--dump-ground-truth", gt_dump,
                  "write the post-run per-row chip state CSV here");
  sim->add_option("--metrics", metrics_out, "metrics CSV path ('-' = stdout)");

  std::string axis = "capacity", values = "64,128,256,512";
  auto* sweep = app.add_subcommand("sweep", "run an evaluation sweep");
  sweep->add_option("--config", config_path, "experiment config file");
  sweep->add_option("--axis", axis, "capacity|n_rh|channels|ranks|slack");
  sweep->add_option("--values", values, "comma-separated axis values");
  sweep->add_option("--out", out_path, "sweep CSV path ('-' = stdout)");

  std::int64_t t1 = 3000, t2 = 3000;
  bool grid = false;
  int bank = 0;
  std::string sample = "subarray", box_out;
  auto* cov = app.add_subcommand("coverage", "row-pair coverage experiment");
  cov->add_option("--config", config_path, "experiment config file");
  cov->add_option("--t1-ps", t1, "first ACT to PRE delay");
  cov->add_option("--t2-ps", t2, "PRE to second ACT delay");
  cov->add_flag("--grid", grid, "sweep the {1.5,3,4.5,6} ns timing grid");
  cov->add_option("--bank", bank, "bank under test");
  cov->add_option("--sample", sample,
                  "tested rows: subarray (one per subarray), blocks "
                  "(first/middle/last 2K), all");
  cov->add_option("--out", out_path, "per-row coverage CSV ('-' = stdout)");
  cov->add_option("--box-out", box_out, "five-number summary CSV");

  std::int64_t victim = -1;
  auto* thr = app.add_subcommand("threshold",
                                 "disturbance-threshold measurement");
  thr->add_option("--config", config_path, "experiment config file");
  thr->add_option("--victim", victim, "victim row (bank-local)")->required();
  thr->add_option("--bank", bank, "bank under test");
  thr->add_option("--out", out_path, "threshold CSV ('-' = stdout)");

  std::string n_rh_csv = "64,128,256,512,1024", slack_csv = "0,2,4,8";
  double target = 1e-15;
  auto* solve = app.add_subcommand("para-solve",
                                   "probability-threshold solver sweep");
  solve->add_option("--config", config_path, "config file (timing source)");
  solve->add_option("--n-rh", n_rh_csv, "comma-separated thresholds");
  solve->add_option("--slack", slack_csv, "comma-separated slack multiples");
  solve->add_option("--target", target, "target failure probability");
  solve->add_option("--out", out_path, "solver CSV ('-' = stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(config_path, duration, mode, slack, seed, event_log,
                          gt_dump, metrics_out);
    if (sweep->parsed()) return cmd_sweep(config_path, axis, values, out_path);
    if (cov->parsed())
      return cmd_coverage(config_path, t1, t2, grid, bank, sample, out_path,
                          box_out);
    if (thr->parsed()) return cmd_threshold(config_path, victim, bank, out_path);
    if (solve->parsed())
      return cmd_para_solve(config_path, n_rh_csv, slack_csv, target, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
