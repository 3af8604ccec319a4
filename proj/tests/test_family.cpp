#include <doctest.h>

#include <cmath>

#include "bcart/family.hpp"
#include "bcart/numeric.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace bcart;
using namespace bcart::testing;

namespace {

NodeParams params(double lambda, double mu = 0.0, double kappa = 0.0) {
  NodeParams p;
  p.lambda = lambda;
  p.mu = mu;
  p.kappa_hat = kappa;
  return p;
}

// Leaf fixture over explicit (claims, exposure) rows.
struct LeafFixture {
  Dataset data;
  std::vector<RowIndex> rows;
  NodeSuffStats stats;

  LeafFixture(std::initializer_list<int> claims, std::initializer_list<double> exposure) {
    DataBuilder b;
    auto c = claims.begin();
    auto v = exposure.begin();
    for (; c != claims.end(); ++c, ++v) b.row(0.0, 0, *c, *v);
    data = b.data;
    for (std::size_t i = 0; i < data.n_rows(); ++i) rows.push_back(static_cast<RowIndex>(i));
    stats = compute_stats(data, rows);
  }
};

FamilyPriors unit_priors() { return FamilyPriors{}; }

double pmf_by_xi_quadrature(Family f, double kappa, double lambda, double v, long m) {
  // Integrate the augmented NB likelihood over xi.
  Fn integrand = [&](double xi) {
    const double lv = lambda * v;
    const double shape = f == Family::kNB1 ? kappa : kappa * v;
    const double dens = m * std::log(lv) - xi * lv + shape * std::log(shape) +
                        (shape + m - 1.0) * std::log(xi) - xi * shape - std::lgamma(shape) -
                        std::lgamma(m + 1.0);
    return std::exp(dens);
  };
  const double shape = f == Family::kNB1 ? kappa : kappa * v;
  return integrate_positive_axis(integrand, (shape + m) / (shape + lambda * v));
}

double pmf_by_zip_marginalization(Family f, double mu, double lambda, double v, long m) {
  // Sum delta in {0,1} and integrate phi out of the augmented ZIP density.
  double total = 0.0;
  for (int delta = 0; delta <= 1; ++delta) {
    if (m > 0 && delta == 0) continue;
    const double odds = f == Family::kZIP1 ? mu : mu * v;
    const double pois = f == Family::kZIP1
                            ? m * std::log(lambda * v) - lambda * v - std::lgamma(m + 1.0)
                            : m * std::log(lambda) - lambda - std::lgamma(m + 1.0);
    Fn integrand = [&](double phi) {
      return std::exp(-phi * (1.0 + odds) + delta * (std::log(odds) + pois));
    };
    total += integrate_positive_axis(integrand, 1.0 / (1.0 + odds));
  }
  return total;
}

}  // namespace

TEST_CASE("log_pmf hand fixtures") {
  CHECK(log_pmf(Family::kPoisson, params(1.0), 0, 1.0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(log_pmf(Family::kNB1, params(1.0, 0.0, 1.0), 0, 1.0) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(log_pmf(Family::kZIP1, params(1.0, 1.0), 0, 1.0) ==
        doctest::Approx(std::log(0.5 + 0.5 * std::exp(-1.0))).epsilon(1e-12));
  CHECK(log_pmf(Family::kZIP1, params(1.0, 1.0), 0, 1.0) ==
        doctest::Approx(std::log(0.683940)).epsilon(1e-5));
  CHECK(log_pmf(Family::kZIP2, params(1.0, 1.0), 0, 0.5) ==
        doctest::Approx(std::log(1.0 / 1.5 + 0.5 / 1.5 * std::exp(-1.0))).epsilon(1e-12));
  CHECK(log_pmf(Family::kZIP2, params(1.0, 1.0), 0, 0.5) ==
        doctest::Approx(std::log(0.789313)).epsilon(1e-5));
}

TEST_CASE("pmfs are normalized") {
  const double v = 0.7;
  for (Family f : {Family::kPoisson, Family::kNB1, Family::kNB2, Family::kZIP1, Family::kZIP2}) {
    const auto p = params(2.3, 1.7, 1.9);
    double total = 0.0;
    for (long m = 0; m <= 300; ++m) total += std::exp(log_pmf(f, p, m, v));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("NB pmf converges to Poisson as kappa grows") {
  const auto poisson = params(1.3);
  const auto nb = params(1.3, 0.0, 1e8);
  for (long m : {0L, 1L, 2L, 5L, 9L}) {
    CHECK(std::abs(log_pmf(Family::kNB1, nb, m, 0.8) - log_pmf(Family::kPoisson, poisson, m, 0.8)) <=
          1e-4);
    CHECK(std::abs(log_pmf(Family::kNB2, nb, m, 0.8) - log_pmf(Family::kPoisson, poisson, m, 0.8)) <=
          1e-4);
  }
}

TEST_CASE("poisson_log_marginal closed-form fixtures") {
  {
    LeafFixture leaf({0}, {1.0});
    CHECK(poisson_log_marginal(leaf.stats, unit_priors()) ==
          doctest::Approx(std::log(0.5)).epsilon(1e-12));
  }
  {
    LeafFixture leaf({1}, {1.0});
    CHECK(poisson_log_marginal(leaf.stats, unit_priors()) ==
          doctest::Approx(std::log(0.25)).epsilon(1e-12));
  }
  {
    LeafFixture leaf({2, 3}, {1.0, 1.0});
    FamilyPriors pr;
    pr.alpha = 2.0;
    pr.beta = 1.0;
    CHECK(poisson_log_marginal(leaf.stats, pr) ==
          doctest::Approx(std::log(720.0 / (12.0 * 2187.0))).epsilon(1e-12));
  }
}

TEST_CASE("poisson_log_marginal matches quadrature of the integrand") {
  Rng rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng.uniform_int(5);
    DataBuilder b;
    for (std::size_t i = 0; i < n; ++i)
      b.row(0.0, 0, static_cast<int>(rng.uniform_int(11)), 0.05 + 0.95 * rng.uniform());
    std::vector<RowIndex> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back(static_cast<RowIndex>(i));
    const auto stats = compute_stats(b.data, rows);
    FamilyPriors pr;
    pr.alpha = 0.5 + 3.0 * rng.uniform();
    pr.beta = 0.3 + 2.0 * rng.uniform();

    Fn integrand = [&](double lambda) {
      double lp = pr.alpha * std::log(pr.beta) - std::lgamma(pr.alpha) +
                  (pr.alpha - 1.0) * std::log(lambda) - pr.beta * lambda;
      for (std::size_t i = 0; i < n; ++i) {
        const double lv = lambda * b.data.exposure[i];
        lp += b.data.claims[i] * std::log(lv) - lv - std::lgamma(b.data.claims[i] + 1.0);
      }
      return std::exp(lp);
    };
    const double scale =
        (static_cast<double>(stats.sum_claims) + pr.alpha) / (stats.sum_exposure + pr.beta);
    const double numeric = integrate_positive_axis(integrand, scale);
    const double closed = poisson_log_marginal(stats, pr);
    CHECK(std::log(numeric) == doctest::Approx(closed).epsilon(1e-8));
  }
}

TEST_CASE("NB and ZIP pmfs are recovered by marginalizing the augmentation") {
  Rng rng(202);
  for (int trial = 0; trial < 25; ++trial) {
    const double kappa = 0.2 + 4.0 * rng.uniform();
    const double lambda = 0.1 + 5.0 * rng.uniform();
    const double mu = 0.1 + 4.0 * rng.uniform();
    const double v = 0.05 + 0.95 * rng.uniform();
    const long m = rng.uniform_int(8);
    for (Family f : {Family::kNB1, Family::kNB2}) {
      const double direct = std::exp(log_pmf(f, params(lambda, 0.0, kappa), m, v));
      const double marginal = pmf_by_xi_quadrature(f, kappa, lambda, v, m);
      CHECK(marginal == doctest::Approx(direct).epsilon(1e-6));
    }
    for (Family f : {Family::kZIP1, Family::kZIP2}) {
      const double direct = std::exp(log_pmf(f, params(lambda, mu), m, v));
      const double marginal = pmf_by_zip_marginalization(f, mu, lambda, v, m);
      CHECK(marginal == doctest::Approx(direct).epsilon(1e-6));
    }
  }
}

TEST_CASE("NB1 augmented marginal at xi=1 factors into the Poisson marginal") {
  LeafFixture leaf({0}, {1.0});
  LatentState z = LatentState::make(Family::kNB1, 1);
  z.xi[0] = 1.0;
  const double aug =
      augmented_log_marginal(Family::kNB1, leaf.data, leaf.rows, leaf.stats, z, 1.0, unit_priors());
  const double pois = poisson_log_marginal(leaf.stats, unit_priors());
  // Gamma(1,1) density at xi=1 contributes exp(-1).
  CHECK(aug == doctest::Approx(pois - 1.0).epsilon(1e-12));
}

TEST_CASE("ZIP1 augmented marginal matches the quadrature oracle and closed form") {
  LeafFixture leaf({2}, {1.0});
  LatentState z = LatentState::make(Family::kZIP1, 1);
  z.delta[0] = 1;
  z.phi[0] = 0.5;
  const double got =
      augmented_log_marginal(Family::kZIP1, leaf.data, leaf.rows, leaf.stats, z, 0.0, unit_priors());
  const double closed = std::log(std::exp(-0.5) / 2.0 * (std::tgamma(2.0) / (1.5 * 1.5)) *
                                 (std::tgamma(3.0) / 8.0));
  CHECK(got == doctest::Approx(closed).epsilon(1e-12));

  // Direct iterated 2-D quadrature of the augmented density times priors.
  Fn outer = [&](double mu) {
    Fn inner = [&](double lambda) {
      const double logf = -0.5 * (1.0 + mu) + std::log(mu) + 2.0 * std::log(lambda) - lambda -
                          std::lgamma(3.0);
      return std::exp(logf - lambda) * 1.0;  // times p(lambda) = e^-lambda for alpha=beta=1
    };
    const double lam_int = integrate_positive_axis(inner, 3.0, 256);
    return lam_int * std::exp(-mu);  // p(mu) = e^-mu
  };
  const double numeric = integrate_positive_axis(outer, 1.0, 256);
  CHECK(std::log(numeric) == doctest::Approx(got).epsilon(1e-7));
}

TEST_CASE("latent full conditionals have the stated distributions") {
  Rng rng(303);
  const int n_draws = 100000;
  {
    // NB1 with kappa=1, N=0, lambda*v=1: xi ~ Gamma(1,2), mean 0.5.
    LeafFixture leaf({0}, {1.0});
    LatentState z = LatentState::make(Family::kNB1, 1);
    double sum = 0.0;
    for (int i = 0; i < n_draws; ++i) {
      sample_latents(Family::kNB1, params(1.0, 0.0, 1.0), leaf.data, leaf.rows, z, rng);
      sum += z.xi[0];
    }
    CHECK(sum / n_draws == doctest::Approx(0.5).epsilon(0.02));
  }
  {
    // ZIP1 with mu=e, lambda*v=1, N=0: delta ~ Bern(0.5).
    LeafFixture leaf({0}, {1.0});
    LatentState z = LatentState::make(Family::kZIP1, 1);
    double ones = 0.0;
    for (int i = 0; i < n_draws; ++i) {
      sample_latents(Family::kZIP1, params(1.0, std::exp(1.0)), leaf.data, leaf.rows, z, rng);
      ones += z.delta[0];
    }
    CHECK(ones / n_draws == doctest::Approx(0.5).epsilon(0.02));
  }
  {
    // ZIP2 with N=3: delta pinned to 1.
    LeafFixture leaf({3}, {0.5});
    LatentState z = LatentState::make(Family::kZIP2, 1);
    for (int i = 0; i < 1000; ++i) {
      sample_latents(Family::kZIP2, params(1.0, 0.4), leaf.data, leaf.rows, z, rng);
      CHECK(z.delta[0] == 1);
    }
  }
}

TEST_CASE("posterior parameter fixtures") {
  {
    // Poisson N=(2,3), v=(1,1), alpha=beta=1: Gamma(6,3), mean 2.
    LeafFixture leaf({2, 3}, {1.0, 1.0});
    const auto p = posterior_mean_params(Family::kPoisson, leaf.stats, {}, 0.0, unit_priors());
    CHECK(p.lambda == doctest::Approx(2.0).epsilon(1e-12));
  }
  {
    // ZIP1 delta=(1,0), phi=(0.5,0.5): mu ~ Gamma(2,2), mean 1.
    LatentSums sums;
    sums.delta = 1.0;
    sums.phi = 1.0;
    NodeSuffStats stats;
    const auto p = posterior_mean_params(Family::kZIP1, stats, sums, 0.0, unit_priors());
    CHECK(p.mu == doctest::Approx(1.0).epsilon(1e-12));
  }
  {
    // NB1 N=(1), v=(1), xi=(2): lambda ~ Gamma(2,3), mean 2/3.
    LeafFixture leaf({1}, {1.0});
    LatentSums sums;
    sums.xi_v = 2.0;
    const auto p = posterior_mean_params(Family::kNB1, leaf.stats, sums, 1.0, unit_priors());
    CHECK(p.lambda == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("sampled posteriors match analytic gamma moments") {
  Rng rng(404);
  LeafFixture leaf({2, 3}, {1.0, 1.0});
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_node_params(Family::kPoisson, leaf.stats, {}, 0.0, unit_priors(), rng);
    sum += p.lambda;
    sumsq += p.lambda * p.lambda;
  }
  // Gamma(6,3): mean 2, var 2/3. Allow 3 standard errors.
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  const double se_mean = std::sqrt(2.0 / 3.0 / n);
  CHECK(std::abs(mean - 2.0) < 3.0 * se_mean);
  CHECK(var == doctest::Approx(2.0 / 3.0).epsilon(0.05));
}

TEST_CASE("kappa moment estimators") {
  {
    LeafFixture leaf({0, 2}, {1.0, 1.0});
    CHECK(estimate_kappa(Family::kNB2, leaf.stats, 1e6) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(estimate_kappa(Family::kNB1, leaf.stats, 1e6) == doctest::Approx(1.0).epsilon(1e-12));
  }
  {
    // Under-dispersed: clamps to kappa_max.
    LeafFixture leaf({1, 1}, {1.0, 1.0});
    CHECK(estimate_kappa(Family::kNB2, leaf.stats, 1e6) == 1e6);
  }
  {
    // Single observation: clamps.
    LeafFixture leaf({4}, {0.5});
    CHECK(estimate_kappa(Family::kNB1, leaf.stats, 1e6) == 1e6);
  }
}

TEST_CASE("node DIC fixtures") {
  FamilyPriors pr = unit_priors();
  {
    // Poisson with no claims: p_D = 0, D = 2*lambda_bar*sum_v.
    LeafFixture leaf({0}, {1.0});
    const auto p = posterior_mean_params(Family::kPoisson, leaf.stats, {}, 0.0, pr);
    CHECK(p.lambda == 0.5);
    const auto dic = node_dic(Family::kPoisson, leaf.data, leaf.rows, leaf.stats, p, {}, pr);
    CHECK(dic.effective_params == 0.0);
    CHECK(dic.deviance == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dic.dic == doctest::Approx(1.0).epsilon(1e-12));
  }
  {
    // Poisson with sum N = 100, alpha = 1: p_D = 200 (log 101 - psi(101)).
    std::vector<int> claims(50, 2);
    DataBuilder b;
    for (int c : claims) b.row(0.0, 0, c, 1.0);
    std::vector<RowIndex> rows;
    for (int i = 0; i < 50; ++i) rows.push_back(i);
    const auto stats = compute_stats(b.data, rows);
    const auto p = posterior_mean_params(Family::kPoisson, stats, {}, 0.0, pr);
    const auto dic = node_dic(Family::kPoisson, b.data, rows, stats, p, {}, pr);
    double harmonic = 0.0;
    for (int k = 1; k <= 100; ++k) harmonic += 1.0 / k;
    const double psi101 = -0.57721566490153286 + harmonic;
    CHECK(dic.effective_params ==
          doctest::Approx(200.0 * (std::log(101.0) - psi101)).epsilon(1e-10));
    CHECK(dic.effective_params == doctest::Approx(0.9917).epsilon(1e-3));
  }
  {
    // NB with a zero-claim node: r_D = 1 exactly.
    LeafFixture leaf({0, 0}, {0.5, 0.5});
    LatentSums sums;
    sums.xi_v = 1.0;
    const auto p = posterior_mean_params(Family::kNB1, leaf.stats, sums, 2.0, pr);
    const auto dic = node_dic(Family::kNB1, leaf.data, leaf.rows, leaf.stats, p, sums, pr);
    CHECK(dic.effective_params == 1.0);
  }
}

TEST_CASE("poisson effective parameters approach one per leaf") {
  // |p_D - 1| <= 0.01 once sum N + alpha >= 100.
  std::vector<int> claims(200, 1);
  DataBuilder b;
  for (int c : claims) b.row(0.0, 0, c, 1.0);
  std::vector<RowIndex> rows;
  for (int i = 0; i < 200; ++i) rows.push_back(i);
  const auto stats = compute_stats(b.data, rows);
  FamilyPriors pr = unit_priors();
  const auto p = posterior_mean_params(Family::kPoisson, stats, {}, 0.0, pr);
  const auto dic = node_dic(Family::kPoisson, b.data, rows, stats, p, {}, pr);
  CHECK(std::abs(dic.effective_params - 1.0) <= 0.01);
}

TEST_CASE("node frequency, variance and expected counts") {
  CHECK(node_frequency(Family::kPoisson, params(2.0)) == 2.0);
  CHECK(node_frequency(Family::kZIP1, params(2.0, 1.0)) == doctest::Approx(1.0));
  CHECK(node_frequency(Family::kZIP1, params(2.0, 1e6)) == doctest::Approx(2.0).epsilon(1e-5));

  CHECK(node_variance(Family::kPoisson, params(1.2)) == doctest::Approx(1.2));
  CHECK(node_variance(Family::kNB1, params(1.0, 0.0, 1.0)) == doctest::Approx(2.0));
  CHECK(node_variance(Family::kZIP2, params(2.0, 1.0)) == doctest::Approx(2.0));

  CHECK(expected_count(Family::kPoisson, params(2.0), 0.5) == doctest::Approx(1.0));
  CHECK(expected_count(Family::kZIP1, params(2.0, 1.0), 1.0) == doctest::Approx(1.0));
  CHECK(expected_count(Family::kZIP2, params(2.0, 1.0), 1.0) == doctest::Approx(1.0));
  CHECK(expected_count(Family::kZIP2, params(2.0, 1.0), 0.5) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("default priors keep alpha/beta at the portfolio frequency") {
  auto data = scenario1(2000, 31);
  const auto pr = default_priors(Family::kPoisson, data, 0.8);
  double sn = 0.0, sv = 0.0;
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    sn += data.claims[i];
    sv += data.exposure[i];
  }
  CHECK(pr.beta == 0.8);
  CHECK(pr.alpha / pr.beta == doctest::Approx(sn / sv).epsilon(1e-12));
  const auto zpr = default_priors(Family::kZIP2, data, 0.8);
  CHECK(zpr.alpha1 == 1.0);
  CHECK(zpr.alpha2 / zpr.beta2 == doctest::Approx(sn / sv).epsilon(1e-12));
}
