#include "hira/para_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hira/logprob.hpp"
#include "hira/rng.hpp"

namespace hira {

void ParaParams::validate() const {
  if (n_rh < 1) throw std::invalid_argument("n_rh must be at least 1");
  if (t_refw <= 0 || t_rc <= 0) throw std::invalid_argument("times must be positive");
  if (refresh_slack < 0) throw std::invalid_argument("refresh_slack must be >= 0");
  if (hc_deadline() >= n_rh)
    throw std::invalid_argument("hc_deadline must be smaller than n_rh");
  if (!(target_p_rh > 0.0 && target_p_rh < 1.0))
    throw std::invalid_argument("target_p_rh must be in (0, 1)");
}

double failed_attempt_prob(std::int64_t hammer_count, double p_th,
                           std::int64_t n_rh) {
  if (hammer_count < 1 || hammer_count >= n_rh)
    throw std::out_of_range("hammer_count must satisfy 1 <= HC < n_rh");
  if (p_th < 0.0 || p_th > 1.0) throw std::out_of_range("p_th must be in [0, 1]");
  const double half = p_th / 2.0;
  return std::exp(static_cast<double>(hammer_count) * log_one_minus(half)) * half;
}

NfMax n_f_max(const ParaParams& p) {
  const std::int64_t slots = p.attack_slots();
  const std::int64_t room = slots - p.n_rh - p.hc_deadline();
  if (room < 0) return {0, true};
  return {room / 2, false};
}

namespace {

// Shared pieces of the success-probability series and the k ratio, in log space.
struct SeriesParts {
  double log_q;      // log(1 - p_th/2)
  double log_ratio;  // log((p_th/2) * (1 - p_th/2))
  std::int64_t terms;
};

SeriesParts series_parts(double p_th, const ParaParams& p) {
  const double half = p_th / 2.0;
  SeriesParts s;
  s.log_q = log_one_minus(half);
  s.log_ratio = std::log(half) + s.log_q;
  s.terms = n_f_max(p).value + 1;
  return s;
}

}  // namespace

double log_p_rh(double p_th, const ParaParams& p) {
  if (!(p_th > 0.0 && p_th <= 1.0))
    throw std::out_of_range("p_th must be in (0, 1]");
  if (n_f_max(p).window_too_small) return kLogZero;
  const SeriesParts s = series_parts(p_th, p);
  const double exponent = static_cast<double>(p.n_rh - p.hc_deadline());
  return exponent * s.log_q + log_geometric_sum(s.log_ratio, s.terms);
}

double p_rh(double p_th, const ParaParams& p) { return std::exp(log_p_rh(p_th, p)); }

double log_p_rh_term_sum(double p_th, const ParaParams& p) {
  if (!(p_th > 0.0 && p_th <= 1.0))
    throw std::out_of_range("p_th must be in (0, 1]");
  if (n_f_max(p).window_too_small) return kLogZero;
  const SeriesParts s = series_parts(p_th, p);
  const double base = static_cast<double>(p.n_rh - p.hc_deadline()) * s.log_q;
  // Term-by-term accumulation capped to where terms stop contributing at
  // double precision relative to the running sum.
  double acc = kLogZero;
  for (std::int64_t n = 0; n < s.terms; ++n) {
    const double term = base + static_cast<double>(n) * s.log_ratio;
    acc = log_sum_exp(acc, term);
    if (term < acc - 60.0) break;  // exp(-60) ~ 1e-26, far below 1e-12 relative
  }
  return acc;
}

namespace {

// Bisection for the smallest p_th in [lo, 1] whose log-probability function
// drops to log_target or below. `f` must be non-increasing in p_th.
template <typename F>
ParaSolution bisect_p_th(F&& f, double log_target, std::int64_t nf) {
  constexpr double kLo = 1e-9;
  constexpr double kTol = 1e-6;
  constexpr int kMaxIter = 80;

  ParaSolution sol;
  sol.n_f_max = nf;

  if (f(1.0) > log_target) {
    sol.reachable = false;
    sol.p_th = 1.0;
    sol.log_achieved = f(1.0);
    sol.achieved_p_rh = std::exp(sol.log_achieved);
    return sol;
  }

  double lo = kLo, hi = 1.0;
  if (f(lo) <= log_target) hi = lo;  // target met across the whole bracket
  int it = 0;
  while (hi - lo > kTol && it < kMaxIter) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) <= log_target)
      hi = mid;
    else
      lo = mid;
    ++it;
  }
  sol.p_th = hi;
  sol.iterations = it;
  sol.log_achieved = f(hi);
  sol.achieved_p_rh = std::exp(sol.log_achieved);
  return sol;
}

}  // namespace

ParaSolution solve_p_th(const ParaParams& p) {
  p.validate();
  const double log_target = std::log(p.target_p_rh);
  return bisect_p_th([&](double p_th) { return log_p_rh(p_th, p); }, log_target,
                     n_f_max(p).value);
}

double log_legacy_p_rh(double p_th, std::int64_t n_rh) {
  if (!(p_th >= 0.0 && p_th <= 1.0))
    throw std::out_of_range("p_th must be in [0, 1]");
  if (n_rh < 1) throw std::out_of_range("n_rh must be >= 1");
  return static_cast<double>(n_rh) * log_one_minus(p_th / 2.0);
}

double legacy_p_rh(double p_th, std::int64_t n_rh) {
  return std::exp(log_legacy_p_rh(p_th, n_rh));
}

ParaSolution legacy_solve_p_th(std::int64_t n_rh, double target) {
  if (!(target > 0.0 && target < 1.0))
    throw std::invalid_argument("target must be in (0, 1)");
  const double log_target = std::log(target);
  return bisect_p_th(
      [&](double p_th) { return log_legacy_p_rh(p_th, n_rh); }, log_target, 0);
}

double k_factor(double p_th, const ParaParams& p) {
  if (!(p_th > 0.0 && p_th <= 1.0))
    throw std::out_of_range("p_th must be in (0, 1]");
  if (n_f_max(p).window_too_small) return 0.0;
  const SeriesParts s = series_parts(p_th, p);
  const double log_k = -static_cast<double>(p.hc_deadline()) * s.log_q +
                       log_geometric_sum(s.log_ratio, s.terms);
  return std::exp(log_k);
}

double exact_success_dp(double p_th, std::int64_t n_rh, std::int64_t t_slots) {
  if (!(p_th >= 0.0 && p_th <= 1.0))
    throw std::out_of_range("p_th must be in [0, 1]");
  if (n_rh < 1 || t_slots < 0) throw std::out_of_range("bad n_rh / t_slots");
  if (t_slots < n_rh) return 0.0;
  if (n_rh > (std::int64_t(1) << 22) || t_slots > (std::int64_t(1) << 22) ||
      n_rh * t_slots > (std::int64_t(1) << 28))
    throw std::length_error("DP table too large; use monte_carlo_p_rh");

  const double q = 1.0 - p_th / 2.0;
  const double reset = p_th / 2.0;

  // f[t][r] = success probability with t slots left and current count r.
  // Only counts r in [0, n_rh) matter; reaching n_rh is absorbing success.
  const std::int64_t T = t_slots;
  std::vector<std::vector<double>> f(
      static_cast<std::size_t>(T + 1),
      std::vector<double>(static_cast<std::size_t>(n_rh), 0.0));
  for (std::int64_t t = 1; t <= T; ++t) {
    for (std::int64_t r = 0; r < n_rh; ++r) {
      if (t < n_rh - r) continue;  // not enough slots left to finish
      const double on_inc =
          (r + 1 == n_rh) ? 1.0 : f[static_cast<std::size_t>(t - 1)]
                                   [static_cast<std::size_t>(r + 1)];
      const double on_reset =
          (t >= 2) ? f[static_cast<std::size_t>(t - 2)][0] : 0.0;
      f[static_cast<std::size_t>(t)][static_cast<std::size_t>(r)] =
          q * on_inc + reset * on_reset;
    }
  }
  return f[static_cast<std::size_t>(T)][0];
}

MonteCarloEstimate monte_carlo_p_rh(double p_th, std::int64_t n_rh,
                                    std::int64_t t_slots, std::int64_t trials,
                                    std::uint64_t seed) {
  if (trials <= 0) throw std::invalid_argument("trials must be positive");
  if (!(p_th >= 0.0 && p_th <= 1.0))
    throw std::out_of_range("p_th must be in [0, 1]");

  Rng rng(seed);
  const double q = 1.0 - p_th / 2.0;
  std::int64_t successes = 0;
  for (std::int64_t i = 0; i < trials; ++i) {
    std::int64_t slots = t_slots;
    std::int64_t count = 0;
    while (slots > 0) {
      if (rng.next_double() < q) {
        --slots;
        if (++count == n_rh) {
          ++successes;
          break;
        }
      } else {
        count = 0;
        slots -= 2;
      }
    }
  }

  MonteCarloEstimate est;
  est.successes = successes;
  est.trials = trials;
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  est.mean = phat;
  const double z = 1.959963984540054;  // 95%
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  est.ci_low = std::max(0.0, center - half);
  est.ci_high = std::min(1.0, center + half);
  return est;
}

std::vector<ParaSweepRow> para_sweep(const std::vector<std::int64_t>& n_rh_values,
                                     const std::vector<int>& slack_multiples,
                                     const TimingParams& tp, double target) {
  std::vector<ParaSweepRow> rows;
  for (std::int64_t n_rh : n_rh_values) {
    const ParaSolution legacy = legacy_solve_p_th(n_rh, target);
    for (int m : slack_multiples) {
      ParaParams p;
      p.n_rh = n_rh;
      p.t_refw = tp.tREFW;
      p.t_rc = tp.tRC;
      p.refresh_slack = static_cast<picoseconds>(m) * tp.tRC;
      p.target_p_rh = target;
      const ParaSolution sol = solve_p_th(p);
      ParaSweepRow row;
      row.n_rh = n_rh;
      row.slack_multiple = m;
      row.p_th = sol.p_th;
      row.p_rh = sol.achieved_p_rh;
      row.k = k_factor(sol.p_th, p);
      row.legacy_p_th = legacy.p_th;
      // Legacy-configured p_th evaluated under the full model (what the
      // attacker actually achieves against a legacy-configured PARA).
      ParaParams p0 = p;
      p0.refresh_slack = 0;
      row.legacy_p_rh = p_rh(legacy.p_th, p0);
      rows.push_back(row);
    }
  }
  return rows;
}

std::string para_sweep_csv(const std::vector<ParaSweepRow>& rows) {
  std::ostringstream out;
  out << "# hira para-solve v1\n";
  out << "N_RH,slack_multiple,p_th,p_rh,k,legacy_p_th,legacy_p_rh\n";
  out.precision(10);
  for (const auto& r : rows) {
    out << r.n_rh << ',' << r.slack_multiple << ',' << r.p_th << ',' << r.p_rh
        << ',' << r.k << ',' << r.legacy_p_th << ',' << r.legacy_p_rh << '\n';
  }
  return out.str();
}

}  // namespace hira
