#include "bcart/simulate.hpp"

#include <cmath>
#include <string>

namespace bcart {

namespace {

const std::vector<std::string> kSixLevels = {"-3", "-2", "-1", "1", "2", "3"};
const double kSixValues[6] = {-3.0, -2.0, -1.0, 1.0, 2.0, 3.0};

double draw_exposure(Rng& rng) {
  // U(0,1]; rng.uniform already excludes 0.
  return rng.uniform();
}

}  // namespace

double chessboard_intensity(double x1, double x2, double when_nonpos, double when_pos) {
  return x1 * x2 <= 0.0 ? when_nonpos : when_pos;
}

long sample_zip(double p_zero, double lambda, double exposure, Rng& rng) {
  if (rng.uniform() <= p_zero) return 0;
  return rng.poisson(lambda * exposure);
}

Dataset simulate_scenario(const ScenarioConfig& config) {
  Rng rng(Rng::derive_seed(config.seed, 0x53494dULL, static_cast<std::uint64_t>(config.scenario)));
  Dataset data;
  data.schema.response_column = "claims";
  data.schema.exposure_column = "exposure";

  if (config.scenario == 1) {
    for (int k = 1; k <= 8; ++k) {
      VariableSpec spec;
      spec.name = "x" + std::to_string(k);
      if (k == 1 || k == 7 || k == 8) {
        spec.kind = VariableKind::kCategorical;
        spec.levels = kSixLevels;
      }
      data.schema.variables.push_back(spec);
    }
    data.columns.resize(8);
    for (std::size_t i = 0; i < config.n; ++i) {
      const int l1 = static_cast<int>(rng.uniform_int(6));
      const double x1 = kSixValues[l1];
      const double x2 = rng.normal();
      data.columns[0].categorical.push_back(l1);
      data.columns[1].numeric.push_back(x2);
      for (int k = 3; k <= 4; ++k)
        data.columns[k - 1].numeric.push_back(2.0 * rng.uniform() - 1.0);
      for (int k = 5; k <= 6; ++k)
        data.columns[k - 1].numeric.push_back(rng.normal());
      for (int k = 7; k <= 8; ++k)
        data.columns[k - 1].categorical.push_back(static_cast<int>(rng.uniform_int(6)));
      const double v = draw_exposure(rng);
      const double lambda = chessboard_intensity(x1, x2, 1.0, 7.0);
      data.exposure.push_back(v);
      data.claims.push_back(static_cast<std::int32_t>(rng.poisson(lambda * v)));
    }
    return data;
  }

  if (config.scenario != 2 && config.scenario != 3)
    throw Error("simulate: scenario must be 1, 2 or 3");
  if (config.scenario == 2 && (!(config.p0 > 0.0) || !(config.p0 < 1.0)))
    throw Error("simulate: scenario 2 needs p0 in (0,1)");
  if (config.scenario == 3 && !(config.tau >= 0.0))
    throw Error("simulate: scenario 3 needs tau >= 0");

  for (int k = 1; k <= 2; ++k) {
    VariableSpec spec;
    spec.name = "x" + std::to_string(k);
    data.schema.variables.push_back(spec);
  }
  data.columns.resize(2);
  const double mu = 0.5;
  for (std::size_t i = 0; i < config.n; ++i) {
    const double x1 = rng.normal();
    const double x2 = rng.normal();
    data.columns[0].numeric.push_back(x1);
    data.columns[1].numeric.push_back(x2);
    // Flipped map relative to scenario 1: high intensity where x1*x2 <= 0.
    const double lambda = chessboard_intensity(x1, x2, 7.0, 1.0);
    if (config.scenario == 2) {
      data.exposure.push_back(1.0);
      data.claims.push_back(static_cast<std::int32_t>(sample_zip(config.p0, lambda, 1.0, rng)));
    } else {
      const double v = draw_exposure(rng);
      const double p = mu / (std::pow(v, config.tau) + mu);
      data.exposure.push_back(v);
      data.claims.push_back(static_cast<std::int32_t>(sample_zip(p, lambda, v, rng)));
    }
  }
  return data;
}

}  // namespace bcart
