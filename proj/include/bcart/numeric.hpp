#pragma once

#include <cmath>

namespace bcart {

// psi(x) = d/dx log Gamma(x), x > 0.
double digamma(double x);

// log Gamma(x + m) - log Gamma(x) for integer m >= 0. Uses the product form
// for small m so that huge x (NB kappa clamped near the Poisson limit) does
// not lose precision to cancellation.
double log_gamma_ratio(double x, long m);

inline double log_factorial(long m) { return std::lgamma(static_cast<double>(m) + 1.0); }

// log(exp(a) + exp(b)) without overflow.
double log_sum_exp(double a, double b);

// log(p/(1-p)) inverse: 1/(1+exp(-t)).
inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace bcart
