#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace hira {

// Log-space probability helpers. Probabilities near 1e-15 underflow naive
// products, so everything downstream of the security analysis works with
// natural-log values and log1p/expm1 primitives.

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log(1 - p) accurate for small p.
inline double log_one_minus(double p) { return std::log1p(-p); }

// log(1 - exp(x)) for x < 0, accurate for x near 0 and for very negative x.
inline double log1m_exp(double x) {
  if (x >= 0.0) return kLogZero;
  // For x > -ln 2 use log(-expm1(x)); otherwise log1p(-exp(x)).
  constexpr double kLn2 = 0.6931471805599453;
  return (x > -kLn2) ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

// log(exp(a) + exp(b)) without overflow/underflow.
inline double log_sum_exp(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

// log of the geometric partial sum  sum_{n=0}^{count-1} r^n  where
// log_r = log(r) < 0:  log((1 - r^count) / (1 - r)).
inline double log_geometric_sum(double log_r, std::int64_t count) {
  if (count <= 0) return kLogZero;
  if (count == 1) return 0.0;
  return log1m_exp(static_cast<double>(count) * log_r) - log1m_exp(log_r);
}

}  // namespace hira
