#include "bcart/family.hpp"

#include <cmath>

#include "bcart/numeric.hpp"

namespace bcart {

Family family_from_string(const std::string& name) {
  if (name == "poisson") return Family::kPoisson;
  if (name == "nb1") return Family::kNB1;
  if (name == "nb2") return Family::kNB2;
  if (name == "zip1") return Family::kZIP1;
  if (name == "zip2") return Family::kZIP2;
  throw Error("unknown family '" + name + "' (expected poisson|nb1|nb2|zip1|zip2)");
}

std::string family_to_string(Family f) {
  switch (f) {
    case Family::kPoisson: return "poisson";
    case Family::kNB1: return "nb1";
    case Family::kNB2: return "nb2";
    case Family::kZIP1: return "zip1";
    case Family::kZIP2: return "zip2";
  }
  return "?";
}

void FamilyPriors::validate() const {
  for (double x : {alpha, beta, alpha1, beta1, alpha2, beta2})
    if (!(x > 0.0)) throw Error("priors: gamma hyper-parameters must be positive");
}

LatentState LatentState::make(Family f, std::size_t n_rows) {
  LatentState z;
  if (is_nb(f)) z.xi.assign(n_rows, 1.0);
  if (is_zip(f)) {
    z.delta.assign(n_rows, 1);
    z.phi.assign(n_rows, 1.0);
  }
  return z;
}

double log_pmf(Family f, const NodeParams& p, long m, double v) {
  switch (f) {
    case Family::kPoisson:
      return m * std::log(p.lambda * v) - p.lambda * v - log_factorial(m);
    case Family::kNB1: {
      const double k = p.kappa_hat;
      const double lv = p.lambda * v;
      return log_gamma_ratio(k, m) - log_factorial(m) - k * std::log1p(lv / k) +
             m * (std::log(lv) - std::log(k + lv));
    }
    case Family::kNB2: {
      const double kv = p.kappa_hat * v;
      return log_gamma_ratio(kv, m) - log_factorial(m) - kv * std::log1p(p.lambda / p.kappa_hat) +
             m * (std::log(p.lambda) - std::log(p.kappa_hat + p.lambda));
    }
    case Family::kZIP1: {
      if (m == 0) return log_sum_exp(0.0, std::log(p.mu) - p.lambda * v) - std::log1p(p.mu);
      return std::log(p.mu) - std::log1p(p.mu) + m * std::log(p.lambda * v) - p.lambda * v -
             log_factorial(m);
    }
    case Family::kZIP2: {
      const double mv = p.mu * v;
      if (m == 0) return log_sum_exp(0.0, std::log(mv) - p.lambda) - std::log1p(mv);
      return std::log(mv) - std::log1p(mv) + m * std::log(p.lambda) - p.lambda - log_factorial(m);
    }
  }
  return 0.0;
}

double poisson_log_marginal(const NodeSuffStats& s, const FamilyPriors& pr) {
  const double a = pr.alpha, b = pr.beta;
  const double sn = static_cast<double>(s.sum_claims);
  return a * std::log(b) - std::lgamma(a) + s.sum_claims_log_v - s.sum_log_claims_factorial +
         std::lgamma(sn + a) - (sn + a) * std::log(s.sum_exposure + b);
}

double augmented_log_marginal(Family f, const Dataset& data, const std::vector<RowIndex>& rows,
                              const NodeSuffStats& stats, const LatentState& z, double kappa_hat,
                              const FamilyPriors& pr) {
  const double sn = static_cast<double>(stats.sum_claims);
  if (is_nb(f)) {
    const double k = kappa_hat;
    double row_terms = 0.0;
    double sum_xi_v = 0.0;
    if (f == Family::kNB1) {
      row_terms += static_cast<double>(stats.n) * (k * std::log(k) - std::lgamma(k));
      row_terms += stats.sum_claims_log_v - stats.sum_log_claims_factorial;
      for (RowIndex r : rows) {
        const double xi = z.xi[r];
        const double v = data.exposure[r];
        row_terms += (k + data.claims[r] - 1.0) * std::log(xi) - xi * k;
        sum_xi_v += xi * v;
      }
    } else {
      row_terms += stats.sum_claims_log_v - stats.sum_log_claims_factorial;
      for (RowIndex r : rows) {
        const double xi = z.xi[r];
        const double v = data.exposure[r];
        const double kv = k * v;
        row_terms += kv * std::log(kv) - std::lgamma(kv) + (kv + data.claims[r] - 1.0) * std::log(xi) -
                     xi * kv;
        sum_xi_v += xi * v;
      }
    }
    return pr.alpha * std::log(pr.beta) - std::lgamma(pr.alpha) + row_terms +
           std::lgamma(sn + pr.alpha) - (sn + pr.alpha) * std::log(sum_xi_v + pr.beta);
  }

  // ZIP: two gamma-integral factors, for the zero-mass odds and the rate.
  double row_terms = 0.0;
  double s_delta = 0.0, s_delta_n = 0.0, s_delta_v = 0.0, s_phi = 0.0, s_phi_v = 0.0;
  for (RowIndex r : rows) {
    const double d = z.delta[r];
    const double phi = z.phi[r];
    const double v = data.exposure[r];
    const long m = data.claims[r];
    row_terms -= phi;
    if (f == Family::kZIP1)
      row_terms += d * (m * std::log(v) - log_factorial(m));
    else
      row_terms += d * (std::log(v) - log_factorial(m));
    s_delta += d;
    s_delta_n += d * static_cast<double>(m);
    s_delta_v += d * v;
    s_phi += phi;
    s_phi_v += phi * v;
  }
  const double mu_rate = f == Family::kZIP1 ? s_phi : s_phi_v;
  const double lam_rate = f == Family::kZIP1 ? s_delta_v : s_delta;
  return pr.alpha1 * std::log(pr.beta1) - std::lgamma(pr.alpha1) + pr.alpha2 * std::log(pr.beta2) -
         std::lgamma(pr.alpha2) + row_terms + std::lgamma(s_delta + pr.alpha1) -
         (s_delta + pr.alpha1) * std::log(mu_rate + pr.beta1) + std::lgamma(s_delta_n + pr.alpha2) -
         (s_delta_n + pr.alpha2) * std::log(lam_rate + pr.beta2);
}

void sample_latents(Family f, const NodeParams& draw, const Dataset& data,
                    const std::vector<RowIndex>& rows, LatentState& z, Rng& rng) {
  switch (f) {
    case Family::kPoisson:
      return;
    case Family::kNB1: {
      const double k = draw.kappa_hat;
      for (RowIndex r : rows)
        z.xi[r] = rng.gamma(k + data.claims[r], k + draw.lambda * data.exposure[r]);
      return;
    }
    case Family::kNB2: {
      const double k = draw.kappa_hat;
      for (RowIndex r : rows) {
        const double kv = k * data.exposure[r];
        z.xi[r] = rng.gamma(kv + data.claims[r], kv + draw.lambda * data.exposure[r]);
      }
      return;
    }
    case Family::kZIP1: {
      const double log_mu = std::log(draw.mu);
      for (RowIndex r : rows) {
        if (data.claims[r] > 0)
          z.delta[r] = 1;
        else
          z.delta[r] = rng.bernoulli(sigmoid(log_mu - draw.lambda * data.exposure[r])) ? 1 : 0;
        z.phi[r] = rng.exponential(1.0 + draw.mu);
      }
      return;
    }
    case Family::kZIP2: {
      const double log_mu = std::log(draw.mu);
      for (RowIndex r : rows) {
        const double v = data.exposure[r];
        if (data.claims[r] > 0)
          z.delta[r] = 1;
        else
          z.delta[r] = rng.bernoulli(sigmoid(log_mu + std::log(v) - draw.lambda)) ? 1 : 0;
        z.phi[r] = rng.exponential(1.0 + draw.mu * v);
      }
      return;
    }
  }
}

LatentSums accumulate_latent_sums(Family f, const Dataset& data, const std::vector<RowIndex>& rows,
                                  const LatentState& z) {
  LatentSums s;
  if (is_nb(f)) {
    for (RowIndex r : rows) s.xi_v += z.xi[r] * data.exposure[r];
  } else if (is_zip(f)) {
    for (RowIndex r : rows) {
      const double d = z.delta[r];
      s.delta += d;
      s.delta_claims += d * static_cast<double>(data.claims[r]);
      s.delta_v += d * data.exposure[r];
      s.phi += z.phi[r];
      s.phi_v += z.phi[r] * data.exposure[r];
    }
  }
  return s;
}

namespace {

struct GammaPosterior {
  double shape, rate;
};

GammaPosterior lambda_posterior(Family f, const NodeSuffStats& stats, const LatentSums& sums,
                                const FamilyPriors& pr) {
  const double sn = static_cast<double>(stats.sum_claims);
  switch (f) {
    case Family::kPoisson: return {sn + pr.alpha, stats.sum_exposure + pr.beta};
    case Family::kNB1:
    case Family::kNB2: return {sn + pr.alpha, sums.xi_v + pr.beta};
    case Family::kZIP1: return {sums.delta_claims + pr.alpha2, sums.delta_v + pr.beta2};
    case Family::kZIP2: return {sums.delta_claims + pr.alpha2, sums.delta + pr.beta2};
  }
  return {1.0, 1.0};
}

GammaPosterior mu_posterior(Family f, const LatentSums& sums, const FamilyPriors& pr) {
  if (f == Family::kZIP1) return {sums.delta + pr.alpha1, sums.phi + pr.beta1};
  return {sums.delta + pr.alpha1, sums.phi_v + pr.beta1};
}

}  // namespace

NodeParams posterior_mean_params(Family f, const NodeSuffStats& stats, const LatentSums& sums,
                                 double kappa_hat, const FamilyPriors& pr) {
  NodeParams p;
  p.kappa_hat = kappa_hat;
  const auto lam = lambda_posterior(f, stats, sums, pr);
  p.lambda = lam.shape / lam.rate;
  if (is_zip(f)) {
    const auto mu = mu_posterior(f, sums, pr);
    p.mu = mu.shape / mu.rate;
  }
  return p;
}

NodeParams sample_node_params(Family f, const NodeSuffStats& stats, const LatentSums& sums,
                              double kappa_hat, const FamilyPriors& pr, Rng& rng) {
  NodeParams p;
  p.kappa_hat = kappa_hat;
  const auto lam = lambda_posterior(f, stats, sums, pr);
  p.lambda = rng.gamma(lam.shape, lam.rate);
  if (is_zip(f)) {
    const auto mu = mu_posterior(f, sums, pr);
    p.mu = rng.gamma(mu.shape, mu.rate);
  }
  return p;
}

double estimate_kappa(Family f, const NodeSuffStats& stats, double kappa_max) {
  if (!is_nb(f)) return 0.0;
  const double n = static_cast<double>(stats.n);
  if (stats.n < 2) return kappa_max;
  const double lambda_hat = static_cast<double>(stats.sum_claims) / stats.sum_exposure;
  const double variance =
      (stats.sum_claims_sq_over_v - 2.0 * lambda_hat * static_cast<double>(stats.sum_claims) +
       lambda_hat * lambda_hat * stats.sum_exposure) /
      (n - 1.0);
  if (!(variance > lambda_hat)) return kappa_max;
  double kappa = lambda_hat * lambda_hat / (variance - lambda_hat);
  if (f == Family::kNB1)
    kappa *= (stats.sum_exposure - stats.sum_exposure_sq / stats.sum_exposure) / (n - 1.0);
  if (!std::isfinite(kappa) || kappa <= 0.0 || kappa > kappa_max) return kappa_max;
  return kappa;
}

double node_log_data_lik(Family f, const Dataset& data, const std::vector<RowIndex>& rows,
                         const NodeSuffStats& stats, const NodeParams& p) {
  if (f == Family::kPoisson) {
    const double sn = static_cast<double>(stats.sum_claims);
    return sn * std::log(p.lambda) + stats.sum_claims_log_v - p.lambda * stats.sum_exposure -
           stats.sum_log_claims_factorial;
  }
  double total = 0.0;
  for (RowIndex r : rows) total += log_pmf(f, p, data.claims[r], data.exposure[r]);
  return total;
}

NodeDic node_dic(Family f, const Dataset& data, const std::vector<RowIndex>& rows,
                 const NodeSuffStats& stats, const NodeParams& mean_params, const LatentSums& sums,
                 const FamilyPriors& pr) {
  NodeDic out;
  out.deviance = -2.0 * node_log_data_lik(f, data, rows, stats, mean_params);
  const double sn = static_cast<double>(stats.sum_claims);
  auto excess = [](double x) { return std::log(x) - digamma(x); };
  switch (f) {
    case Family::kPoisson:
      out.effective_params = 2.0 * excess(sn + pr.alpha) * sn;
      break;
    case Family::kNB1:
    case Family::kNB2:
      out.effective_params = 1.0 + 2.0 * excess(sn + pr.alpha) * sn;
      break;
    case Family::kZIP1:
    case Family::kZIP2:
      out.effective_params = 2.0 * excess(sums.delta + pr.alpha1) * sums.delta +
                             2.0 * excess(sums.delta_claims + pr.alpha2) * sums.delta_claims;
      break;
  }
  out.dic = out.deviance + 2.0 * out.effective_params;
  return out;
}

double node_frequency(Family f, const NodeParams& p) {
  if (is_zip(f)) return p.mu * p.lambda / (1.0 + p.mu);
  return p.lambda;
}

double node_variance(Family f, const NodeParams& p) {
  switch (f) {
    case Family::kPoisson: return p.lambda;
    case Family::kNB1:
    case Family::kNB2: return p.lambda * (1.0 + p.lambda / p.kappa_hat);
    case Family::kZIP1:
    case Family::kZIP2: {
      const double om = 1.0 + p.mu;
      return p.mu * p.lambda * (1.0 + p.mu + p.lambda) / (om * om);
    }
  }
  return 0.0;
}

double expected_count(Family f, const NodeParams& p, double exposure) {
  switch (f) {
    case Family::kPoisson:
    case Family::kNB1:
    case Family::kNB2: return p.lambda * exposure;
    case Family::kZIP1: return p.mu / (1.0 + p.mu) * p.lambda * exposure;
    case Family::kZIP2: {
      const double mv = p.mu * exposure;
      return mv / (1.0 + mv) * p.lambda;
    }
  }
  return 0.0;
}

FamilyPriors default_priors(Family f, const Dataset& train, double beta) {
  double sum_claims = 0.0, sum_expo = 0.0;
  for (std::size_t i = 0; i < train.n_rows(); ++i) {
    sum_claims += train.claims[i];
    sum_expo += train.exposure[i];
  }
  const double ratio = sum_expo > 0.0 && sum_claims > 0.0 ? sum_claims / sum_expo : 1.0;
  FamilyPriors pr;
  if (is_zip(f)) {
    pr.alpha1 = 1.0;
    pr.beta1 = 1.0;
    pr.alpha2 = beta * ratio;
    pr.beta2 = beta;
  } else {
    pr.alpha = beta * ratio;
    pr.beta = beta;
  }
  return pr;
}

}  // namespace bcart
