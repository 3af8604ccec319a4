#pragma once

#include <cstdint>

#include "bcart/dataset.hpp"
#include "bcart/rng.hpp"

namespace bcart {

// The three synthetic data generators of the experiments section.
//  1: Poisson chessboard intensity over (x1, x2) plus six noise variables,
//     x1/x7/x8 categorical, exposure U(0,1].
//  2: ZIP response with constant zero-mass probability p0, unit exposure.
//  3: ZIP response whose zero-mass probability p_i = mu/(v_i^tau + mu)
//     couples to exposure through tau (mu fixed at 0.5).
struct ScenarioConfig {
  int scenario = 1;
  std::size_t n = 5000;
  std::uint64_t seed = 1;
  double p0 = 0.05;   // scenario 2
  double tau = 1.0;   // scenario 3
};

Dataset simulate_scenario(const ScenarioConfig& config);

// Zero-inflated Poisson draw: zero with probability p_zero, otherwise
// Poisson(lambda * exposure).
long sample_zip(double p_zero, double lambda, double exposure, Rng& rng);

// Chessboard intensity map over the sign of x1*x2.
double chessboard_intensity(double x1, double x2, double when_nonpos, double when_pos);

}  // namespace bcart
