#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcart/dataset.hpp"
#include "bcart/rng.hpp"
#include "bcart/tree.hpp"

namespace bcart {

// Response families: Poisson; negative binomial with per-observation (NB1)
// or fixed (NB2) dispersion relative to exposure; zero-inflated Poisson with
// the exposure in the Poisson part (ZIP1) or the zero-mass part (ZIP2).
enum class Family { kPoisson, kNB1, kNB2, kZIP1, kZIP2 };

inline bool is_nb(Family f) { return f == Family::kNB1 || f == Family::kNB2; }
inline bool is_zip(Family f) { return f == Family::kZIP1 || f == Family::kZIP2; }
inline bool is_augmented(Family f) { return is_nb(f) || is_zip(f); }

Family family_from_string(const std::string& name);
std::string family_to_string(Family f);

// Gamma hyper-parameters. Poisson/NB use (alpha, beta) on the rate; ZIP adds
// (alpha1, beta1) on the zero-mass odds mu and uses (alpha2, beta2) on the
// rate instead.
struct FamilyPriors {
  double alpha = 1.0, beta = 1.0;
  double alpha1 = 1.0, beta1 = 1.0;
  double alpha2 = 1.0, beta2 = 1.0;

  void validate() const;
};

struct NodeParams {
  double lambda = 0.0;
  double mu = 0.0;         // ZIP only
  double kappa_hat = 0.0;  // NB only
};

// Per-observation augmentation variables, indexed by dataset row so they
// transfer across tree proposals untouched.
struct LatentState {
  std::vector<double> xi;
  std::vector<std::uint8_t> delta;
  std::vector<double> phi;

  static LatentState make(Family f, std::size_t n_rows);
};

double log_pmf(Family f, const NodeParams& p, long claims, double exposure);

double poisson_log_marginal(const NodeSuffStats& stats, const FamilyPriors& priors);

// Integrated augmented likelihood of one node at the given latent values.
double augmented_log_marginal(Family f, const Dataset& data, const std::vector<RowIndex>& rows,
                              const NodeSuffStats& stats, const LatentState& z, double kappa_hat,
                              const FamilyPriors& priors);

// Refreshes the latent variables of the given rows from their full
// conditionals at the node's current parameter draw.
void sample_latents(Family f, const NodeParams& draw, const Dataset& data,
                    const std::vector<RowIndex>& rows, LatentState& z, Rng& rng);

LatentSums accumulate_latent_sums(Family f, const Dataset& data, const std::vector<RowIndex>& rows,
                                  const LatentState& z);

NodeParams posterior_mean_params(Family f, const NodeSuffStats& stats, const LatentSums& sums,
                                 double kappa_hat, const FamilyPriors& priors);
NodeParams sample_node_params(Family f, const NodeSuffStats& stats, const LatentSums& sums,
                              double kappa_hat, const FamilyPriors& priors, Rng& rng);

// Moment-matched dispersion. Under-dispersed or degenerate nodes clamp to
// kappa_max (the effective Poisson limit).
double estimate_kappa(Family f, const NodeSuffStats& stats, double kappa_max);

struct NodeDic {
  double deviance = 0.0;          // D at the posterior-mean parameters
  double effective_params = 0.0;  // p_D / r_D / q_D
  double dic = 0.0;
};

NodeDic node_dic(Family f, const Dataset& data, const std::vector<RowIndex>& rows,
                 const NodeSuffStats& stats, const NodeParams& mean_params, const LatentSums& sums,
                 const FamilyPriors& priors);

// Sum of log pmf at the posterior-mean parameters (the data likelihood).
double node_log_data_lik(Family f, const Dataset& data, const std::vector<RowIndex>& rows,
                         const NodeSuffStats& stats, const NodeParams& mean_params);

// Predicted unit-exposure frequency and its variance for a leaf.
double node_frequency(Family f, const NodeParams& p);
double node_variance(Family f, const NodeParams& p);
// Expected claim count at the given exposure.
double expected_count(Family f, const NodeParams& p, double exposure);

// alpha/beta = overall claims frequency with beta fixed; ZIP applies the
// rule to (alpha2, beta2) and keeps (alpha1, beta1) = (1, 1).
FamilyPriors default_priors(Family f, const Dataset& train, double beta = 0.8);

}  // namespace bcart
