#include <cmath>
#include <vector>

#include "doctest.h"
#include "hira/logprob.hpp"
#include "hira/para_analysis.hpp"

using namespace hira;

namespace {

ParaParams params_for_slots(std::int64_t n_rh, std::int64_t t_slots,
                            std::int64_t slack_slots = 0) {
  ParaParams p;
  p.t_rc = 46250;
  p.t_refw = t_slots * p.t_rc;
  p.n_rh = n_rh;
  p.refresh_slack = slack_slots * p.t_rc;
  return p;
}

// Brute-force reference for the success-probability series, plain double
// arithmetic. Independent of the log-space closed form under test.
double series_reference(double p_th, std::int64_t n_rh, std::int64_t nf_max,
                        std::int64_t hc_deadline) {
  const double q = 1.0 - p_th / 2.0;
  double sum = 0.0;
  for (std::int64_t nf = 0; nf <= nf_max; ++nf)
    sum += std::pow(q, static_cast<double>(nf + n_rh - hc_deadline)) *
           std::pow(p_th / 2.0, static_cast<double>(nf));
  return sum;
}

// Reference evaluation of the hammer-count chain with an absorbing success
// state, written against the recurrence rather than the production table.
double chain_ref(double p_th, std::int64_t n_rh, std::int64_t t_slots) {
  const double q = 1.0 - p_th / 2.0;
  std::vector<std::vector<double>> memo(
      static_cast<std::size_t>(t_slots + 1),
      std::vector<double>(static_cast<std::size_t>(n_rh) + 1, -1.0));
  for (std::int64_t t = 0; t <= t_slots; ++t) {
    for (std::int64_t r = 0; r <= n_rh; ++r) {
      double v;
      if (r == n_rh) {
        v = 1.0;
      } else if (t < n_rh - r) {
        v = 0.0;
      } else {
        const double inc = memo[static_cast<std::size_t>(t - 1)]
                               [static_cast<std::size_t>(r + 1)];
        const double reset =
            t >= 2 ? memo[static_cast<std::size_t>(t - 2)][0] : 0.0;
        v = q * inc + (1.0 - q) * reset;
      }
      memo[static_cast<std::size_t>(t)][static_cast<std::size_t>(r)] = v;
    }
  }
  return memo[static_cast<std::size_t>(t_slots)][0];
}

}  // namespace

TEST_CASE("failed_attempt_prob matches the closed form") {
  // (1 - p/2)^HC * p/2
  CHECK(failed_attempt_prob(1, 1.0, 10) == doctest::Approx(0.25));
  CHECK(failed_attempt_prob(2, 0.5, 10) == doctest::Approx(0.140625));
  CHECK_THROWS(failed_attempt_prob(0, 0.5, 10));
  CHECK_THROWS(failed_attempt_prob(10, 0.5, 10));  // HC must be < n_rh
}

TEST_CASE("n_f_max floors the window arithmetic") {
  ParaParams p;  // 64 ms / 46.25 ns defaults
  p.n_rh = 9600;
  CHECK(p.attack_slots() == 1383783);
  CHECK(n_f_max(p).value == 687091);

  // No room for failed attempts when the threshold fills the window.
  ParaParams q = params_for_slots(100, 100);
  CHECK(n_f_max(q).value == 0);
  CHECK_FALSE(n_f_max(q).window_too_small);

  ParaParams r = params_for_slots(101, 100);
  CHECK(n_f_max(r).window_too_small);

  // Slack reduces the numerator by the deadline hammer count.
  ParaParams s = params_for_slots(100, 1000, 8);
  CHECK(s.hc_deadline() == 8);
  CHECK(n_f_max(s).value == (1000 - 100 - 8) / 2);
}

TEST_CASE("p_rh evaluates the success series") {
  // q^2 + q^3 * p/2 with q = 0.75: 0.5625 + 0.10546875
  const ParaParams p = params_for_slots(2, 4);
  CHECK(p_rh(0.5, p) == doctest::Approx(0.66796875).epsilon(1e-12));
  CHECK(series_reference(0.5, 2, 1, 0) == doctest::Approx(0.66796875));

  // p_th = 1, N_RH = 1, T = 3: 0.5 + 0.25 * 0.5 = 0.625
  const ParaParams p2 = params_for_slots(1, 3);
  CHECK(p_rh(1.0, p2) == doctest::Approx(0.625).epsilon(1e-12));

  // Vanishing defense: p_rh approaches 1 when the window dwarfs the threshold.
  const ParaParams p3 = params_for_slots(4, 4000);
  CHECK(p_rh(1e-9, p3) > 0.999);
}

TEST_CASE("closed form matches term-by-term log summation to 1e-12") {
  const std::vector<double> pths = {1e-4, 1e-2, 0.1, 0.3, 0.5, 0.86, 1.0};
  const std::vector<std::int64_t> n_rhs = {16, 64, 1024, 9600};
  for (double pth : pths) {
    for (std::int64_t n : n_rhs) {
      ParaParams p;
      p.n_rh = n;
      const double closed = log_p_rh(pth, p);
      const double term = log_p_rh_term_sum(pth, p);
      CHECK(std::abs(closed - term) <=
            1e-12 * std::max(1.0, std::abs(closed)));
    }
  }
}

TEST_CASE("p_rh against a plain-double brute force on small windows") {
  for (double pth : {0.1, 0.4, 0.9}) {
    for (std::int64_t n : {2, 5, 16}) {
      for (std::int64_t slots : {20, 64}) {
        const ParaParams p = params_for_slots(n, slots);
        const double ref = series_reference(pth, n, n_f_max(p).value, 0);
        CHECK(p_rh(pth, p) == doctest::Approx(ref).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("solve_p_th finds the smallest satisfying threshold") {
  ParaParams p;
  p.n_rh = 1024;
  p.target_p_rh = 1e-15;
  const ParaSolution sol = solve_p_th(p);
  CHECK(sol.reachable);
  CHECK(sol.achieved_p_rh <= 1e-15);
  // Re-evaluating the solution reproduces the achieved probability.
  CHECK(p_rh(sol.p_th, p) == doctest::Approx(sol.achieved_p_rh).epsilon(1e-9));
  // Minimality: a slightly smaller p_th no longer meets the target.
  CHECK(p_rh(sol.p_th - 2e-6, p) > 1e-15);

  // Unreachable target is reported, not fudged.
  ParaParams hard = params_for_slots(4, 4000);
  hard.target_p_rh = 1e-15;
  CHECK_FALSE(solve_p_th(hard).reachable);
}

TEST_CASE("legacy configuration and the k factor") {
  // p_rh_legacy = (1 - p_th/2)^n_rh
  CHECK(legacy_p_rh(1.0, 2) == doctest::Approx(0.25));
  CHECK_THROWS(legacy_p_rh(2.0, 16));

  const ParaSolution l1024 = legacy_solve_p_th(1024, 1e-15);
  CHECK(l1024.p_th == doctest::Approx(0.066).epsilon(0.08));
  const ParaSolution l64 = legacy_solve_p_th(64, 1e-15);
  CHECK(l64.p_th == doctest::Approx(0.834).epsilon(0.01));

  // k = (1-p/2)^(-D) * sum ((p/2)(1-p/2))^Nf; slack 0 collapses the prefix.
  ParaParams p;
  p.n_rh = 50000;
  CHECK(k_factor(0.001, p) == doctest::Approx(1.0005).epsilon(2e-4));
  ParaParams p64;
  p64.n_rh = 64;
  CHECK(k_factor(0.8341, p64) == doctest::Approx(1.3212).epsilon(2e-3));
  // k ties the two models together: p_rh == k * p_rh_legacy.
  for (double pth : {0.05, 0.47, 0.86}) {
    const double lhs = p_rh(pth, p64);
    const double rhs = k_factor(pth, p64) * legacy_p_rh(pth, 64);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
}

TEST_CASE("exact chain probability by dynamic programming") {
  // f(4,0) = 0.75 f(3,1) + 0.25 f(2,0); f(3,1) = 0.75; f(2,0) = 0.5625
  CHECK(exact_success_dp(0.5, 2, 4) == doctest::Approx(0.703125).epsilon(1e-12));
  CHECK(exact_success_dp(0.5, 2, 4) ==
        doctest::Approx(chain_ref(0.5, 2, 4)).epsilon(1e-12));
  // One slot, threshold one: succeeds iff the single activation is unrefreshed.
  CHECK(exact_success_dp(0.3, 1, 1) == doctest::Approx(0.85));
  // Not enough slots.
  CHECK(exact_success_dp(0.5, 4, 3) == 0.0);

  for (double pth : {0.2, 0.6}) {
    for (std::int64_t n : {3, 8}) {
      CHECK(exact_success_dp(pth, n, 40) ==
            doctest::Approx(chain_ref(pth, n, 40)).epsilon(1e-12));
    }
  }
}

TEST_CASE("monte carlo agrees with the DP on pinned seeds") {
  const double exact = exact_success_dp(0.5, 2, 4);
  const MonteCarloEstimate est = monte_carlo_p_rh(0.5, 2, 4, 1000000, 42);
  CHECK(est.covers(exact));
  CHECK(est.mean == doctest::Approx(exact).epsilon(0.01));

  const MonteCarloEstimate est2 = monte_carlo_p_rh(1.0, 2, 2, 1000000, 43);
  CHECK(est2.covers(0.25));
  CHECK_THROWS(monte_carlo_p_rh(0.5, 2, 4, 0, 1));
}

TEST_CASE("monotonicity of the success probability") {
  // Decreasing in p_th, increasing as N_RH decreases, non-decreasing in slack.
  const ParaParams base = params_for_slots(64, 4096);
  double prev = 1.0;
  for (double pth : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    const double v = p_rh(pth, base);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(p_rh(0.4, params_for_slots(32, 4096)) >
        p_rh(0.4, params_for_slots(64, 4096)));
  CHECK(log_p_rh(0.4, params_for_slots(64, 4096, 8)) >=
        log_p_rh(0.4, params_for_slots(64, 4096, 0)));
}

TEST_CASE("solve_p_th is non-decreasing in the refresh slack") {
  double prev = 0.0;
  for (std::int64_t slack : {0, 2, 4, 8}) {
    ParaParams p;
    p.n_rh = 128;
    p.refresh_slack = slack * p.t_rc;
    const double pth = solve_p_th(p).p_th;
    CHECK(pth >= prev);
    prev = pth;
  }
}

TEST_CASE("legacy-configured PARA misses the target and the gap widens") {
  double prev_ratio = 0.0;
  for (std::int64_t n : {1024, 256, 64}) {
    const double legacy_pth = legacy_solve_p_th(n, 1e-15).p_th;
    ParaParams p;
    p.n_rh = n;
    const double achieved = p_rh(legacy_pth, p);
    CHECK(achieved > 1e-15);
    const double ratio = achieved / 1e-15;
    CHECK(ratio > prev_ratio);
    prev_ratio = ratio;
  }
}

TEST_CASE("para sweep CSV carries the solver columns") {
  TimingParams tp;
  const auto rows = para_sweep({64}, {0, 2}, tp, 1e-15);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].n_rh == 64);
  CHECK(rows[0].p_th > rows[0].legacy_p_th);
  const std::string csv = para_sweep_csv(rows);
  CHECK(csv.find("N_RH,slack_multiple,p_th,p_rh,k,legacy_p_th,legacy_p_rh") !=
        std::string::npos);
}
