#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hira/timing.hpp"
#include "hira/types.hpp"

namespace hira {

// Inputs to the PARA probability-threshold analysis.
//
// The attacker model: activations to one bank are spaced at least tRC apart,
// so a refresh window admits attack_slots() = floor(tREFW / tRC) activations.
// A queued preventive refresh may be delayed by up to refresh_slack, during
// which the attacker lands hc_deadline() = floor(refresh_slack / tRC)
// additional activations that the pending refresh cannot stop.
struct ParaParams {
  std::int64_t n_rh = 9600;            // RowHammer threshold (activations)
  picoseconds t_refw = 64000000000;    // refresh window
  picoseconds t_rc = 46250;            // row cycle time
  picoseconds refresh_slack = 0;       // tRefSlack
  double target_p_rh = 1e-15;          // acceptable RowHammer success probability

  std::int64_t attack_slots() const { return t_refw / t_rc; }
  std::int64_t hc_deadline() const { return refresh_slack / t_rc; }

  void validate() const;
};

struct ParaSolution {
  double p_th = 0.0;
  double achieved_p_rh = 0.0;   // p_rh(p_th)
  double log_achieved = 0.0;    // ln of the above (usable below DBL_MIN)
  int iterations = 0;
  std::int64_t n_f_max = 0;
  bool reachable = true;        // false if even p_th = 1 misses the target
};

// Probability that one attempt fails after exactly `hammer_count` activations
// that did not trigger a victim refresh, followed by one that did:
// (1 - p_th/2)^HC * p_th/2, defined for 1 <= HC < n_rh.
double failed_attempt_prob(std::int64_t hammer_count, double p_th,
                           std::int64_t n_rh);

// Maximum number of worst-case (two-slot) failed attempts that fit in the
// refresh window together with one successful attempt. Clamped to zero (with
// `window_too_small` telling the caller) when the window cannot fit even the
// successful attempt.
struct NfMax {
  std::int64_t value = 0;
  bool window_too_small = false;
};
NfMax n_f_max(const ParaParams& p);

// Overall RowHammer success probability for a given PARA threshold:
//   sum_{N_f=0}^{N_f_max} (1 - p_th/2)^(N_f + n_rh - hc_deadline) * (p_th/2)^N_f
// Evaluated as a closed-form geometric partial sum in log space; p_rh_log_sum
// evaluates the same series term by term (log-sum-exp) as a cross-check.
double log_p_rh(double p_th, const ParaParams& p);
double p_rh(double p_th, const ParaParams& p);
double log_p_rh_term_sum(double p_th, const ParaParams& p);

// Smallest p_th (bisection, tolerance 1e-6) with p_rh(p_th) <= target.
ParaSolution solve_p_th(const ParaParams& p);

// The original PARA configuration: p_rh_legacy = (1 - p_th/2)^n_rh.
double log_legacy_p_rh(double p_th, std::int64_t n_rh);
double legacy_p_rh(double p_th, std::int64_t n_rh);
ParaSolution legacy_solve_p_th(std::int64_t n_rh, double target);

// Ratio k with p_rh = k * p_rh_legacy:
//   (1 - p_th/2)^(-hc_deadline) * sum_{N_f=0}^{N_f_max} ((p_th/2)(1-p_th/2))^N_f
double k_factor(double p_th, const ParaParams& p);

// Exact success probability of the hammer-count chain, evaluated by dynamic
// programming over (slots left, current count). One activation consumes one
// slot and increments the count with probability q = 1 - p_th/2; otherwise
// the count resets and the preventive-refresh activation consumes one
// additional slot:
//   f(t, r) = q * (r+1 == n_rh ? 1 : f(t-1, r+1)) + (1-q) * f(t-2, 0)
double exact_success_dp(double p_th, std::int64_t n_rh, std::int64_t t_slots);

struct MonteCarloEstimate {
  double mean = 0.0;
  double ci_low = 0.0;   // 95% Wilson interval
  double ci_high = 0.0;
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  bool covers(double p) const { return p >= ci_low && p <= ci_high; }
};

// Seeded simulation of the same chain.
MonteCarloEstimate monte_carlo_p_rh(double p_th, std::int64_t n_rh,
                                    std::int64_t t_slots, std::int64_t trials,
                                    std::uint64_t seed);

// One row of the para-solve CSV (the data behind the p_th / p_rh curves).
struct ParaSweepRow {
  std::int64_t n_rh;
  int slack_multiple;
  double p_th;
  double p_rh;
  double k;
  double legacy_p_th;
  double legacy_p_rh;
};

std::vector<ParaSweepRow> para_sweep(const std::vector<std::int64_t>& n_rh_values,
                                     const std::vector<int>& slack_multiples,
                                     const TimingParams& tp, double target);

std::string para_sweep_csv(const std::vector<ParaSweepRow>& rows);

}  // namespace hira
