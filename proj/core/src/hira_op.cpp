#include "hira/hira_op.hpp"

#include <stdexcept>

namespace hira {

void HiraConfig::validate(const TimingParams& tp) const {
  if (t1 <= 0 || t2 <= 0)
    throw std::invalid_argument("t1 and t2 must be positive");
  if (t1 > tp.tRC || t2 > tp.tRC)
    throw std::invalid_argument(
        "t1 and t2 are engineered sub-nominal delays, at most tRC");
}

HiraPlan HiraPlan::make(const HiraConfig& cfg, const TimingParams& tp,
                        RowId first_row, RowId second_row) {
  cfg.validate(tp);
  HiraPlan p;
  p.first_row = first_row;
  p.second_row = second_row;
  p.pre_offset = cfg.t1;
  p.second_act_offset = cfg.t1 + cfg.t2;
  p.column_ready_offset = p.second_act_offset + tp.tRCD;
  p.closing_pre_offset = p.second_act_offset + tp.tRAS;
  return p;
}

std::string to_string(HiraCondition c) {
  switch (c) {
    case HiraCondition::SenseAmpEnable:
      return "t1 too short to enable sense amplifiers";
    case HiraCondition::WordlineStillUp:
      return "t2 too long: first row's wordline already disabled";
    case HiraCondition::BankIoDisconnect:
      return "t2 too short to disconnect first row from bank I/O";
    case HiraCondition::IsolatedSubarrays:
      return "rows do not sit in isolated subarrays";
  }
  return "unknown";
}

HiraValidation validate_hira(const HiraConfig& cfg, const IsolationMap& map,
                             const Geometry& geom, RowId row_a, RowId row_b,
                             const ElectricalWindows& windows) {
  if (row_a < 0 || row_a >= geom.rows_per_bank() || row_b < 0 ||
      row_b >= geom.rows_per_bank())
    throw std::out_of_range("rows must be bank-local ids within one bank");

  HiraValidation v;
  if (cfg.t1 < windows.sense_enable_min)
    v.violated.push_back(HiraCondition::SenseAmpEnable);
  if (cfg.t2 > windows.wordline_disable_max)
    v.violated.push_back(HiraCondition::WordlineStillUp);
  if (cfg.purpose == HiraPurpose::RefreshAccess &&
      cfg.t2 < windows.bankio_disconnect_min)
    v.violated.push_back(HiraCondition::BankIoDisconnect);
  if (!map.isolated(geom.subarray_of(row_a), geom.subarray_of(row_b)))
    v.violated.push_back(HiraCondition::IsolatedSubarrays);
  return v;
}

picoseconds two_row_refresh_latency(const HiraConfig& cfg,
                                    const TimingParams& tp) {
  cfg.validate(tp);
  return cfg.t1 + cfg.t2 + tp.tRAS;
}

picoseconds baseline_two_row_refresh_latency(const TimingParams& tp) {
  return tp.tRAS + tp.tRP + tp.tRAS;
}

double latency_reduction(const HiraConfig& cfg, const TimingParams& tp) {
  return 1.0 - static_cast<double>(two_row_refresh_latency(cfg, tp)) /
                   static_cast<double>(baseline_two_row_refresh_latency(tp));
}

}  // namespace hira
