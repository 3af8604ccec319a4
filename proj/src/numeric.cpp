#include "bcart/numeric.hpp"

#include <cmath>
#include <limits>

namespace bcart {

double digamma(double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  double result = 0.0;
  // Shift into the asymptotic regime.
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Asymptotic expansion, Bernoulli-number coefficients.
  double series = inv2 * (1.0 / 12.0
                - inv2 * (1.0 / 120.0
                - inv2 * (1.0 / 252.0
                - inv2 * (1.0 / 240.0
                - inv2 * (1.0 / 132.0
                - inv2 * (691.0 / 32760.0
                - inv2 * (1.0 / 12.0)))))));
  return result + std::log(x) - 0.5 * inv - series;
}

double log_gamma_ratio(double x, long m) {
  if (m < 0) return -log_gamma_ratio(x + static_cast<double>(m), -m);
  if (m <= 64) {
    double s = 0.0;
    for (long j = 0; j < m; ++j) s += std::log(x + static_cast<double>(j));
    return s;
  }
  return std::lgamma(x + static_cast<double>(m)) - std::lgamma(x);
}

double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double hi = a > b ? a : b;
  double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace bcart
