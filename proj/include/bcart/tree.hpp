#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "bcart/dataset.hpp"

namespace bcart {

// Split on one covariate: numeric sends x < threshold left, categorical
// sends x in subset left. The subset is a bitmask over the schema's level
// indices and must be a proper non-empty subset of the declared levels.
struct DecisionRule {
  int variable = -1;
  double threshold = 0.0;
  std::uint64_t subset = 0;

  bool operator==(const DecisionRule&) const = default;
};

struct NodeSuffStats {
  std::int64_t n = 0;
  std::int64_t sum_claims = 0;
  double sum_exposure = 0.0;
  // Derived aggregates consumed by the likelihood, kappa and DIC formulas.
  double sum_exposure_sq = 0.0;
  double sum_claims_sq_over_v = 0.0;
  double sum_log_claims_factorial = 0.0;
  double sum_claims_log_v = 0.0;
};

struct LatentSums {
  double xi_v = 0.0;        // sum xi*v (NB)
  double delta = 0.0;       // sum delta (ZIP)
  double delta_claims = 0.0;
  double delta_v = 0.0;
  double phi = 0.0;
  double phi_v = 0.0;
};

// Per-leaf model state maintained by the chain. tree edits copy it for
// untouched leaves and leave it zeroed for rebuilt ones.
struct LeafState {
  double lambda_mean = 0.0;   // posterior mean of the frequency rate
  double mu_mean = 0.0;       // posterior mean of the zero-mass odds (ZIP)
  double lambda_draw = 0.0;   // current Gibbs draw
  double mu_draw = 0.0;
  double kappa_hat = 0.0;     // moment-estimated dispersion (NB)
  bool growable = false;
  double log_marginal = 0.0;  // cached node (augmented) integrated likelihood
  double log_data_lik = 0.0;  // cached sum of log pmf at the posterior mean
  LatentSums latent;
};

using RowSet = std::shared_ptr<const std::vector<RowIndex>>;

struct Node {
  bool is_leaf = true;
  int depth = 0;
  // Internal nodes.
  DecisionRule rule;
  int left = -1;
  int right = -1;
  // Leaves.
  RowSet rows;
  NodeSuffStats stats;
  LeafState state;
};

// Rooted binary tree over a compact arena; node 0 is the root. Value
// semantics: edits return new trees, row sets are shared immutably.
struct Tree {
  std::vector<Node> nodes;

  int root() const { return 0; }
  int n_leaves() const;
  int n_internal() const { return static_cast<int>(nodes.size()) - n_leaves(); }
  std::vector<int> leaves() const;
  std::vector<int> internals() const;
  // Internal nodes whose children are both leaves (prunable).
  std::vector<int> leaf_parents() const;
  std::vector<int> leaves_under(int node) const;
  std::vector<int> internals_under(int node) const;
  std::vector<int> variable_usage(std::size_t n_variables) const;
};

NodeSuffStats compute_stats(const Dataset& data, const std::vector<RowIndex>& rows);

// True if the rule sends the row left.
bool rule_sends_left(const DecisionRule& rule, const Dataset& data, RowIndex row);

Tree make_root_tree(const Dataset& data);

int route(const Tree& tree, const Dataset& data, RowIndex row);

struct EditResult {
  Tree tree;
  std::vector<int> new_leaves;  // leaf ids in the new tree with rebuilt rows
};

// Structural edits. Each returns a fresh compact tree with stats of the
// rebuilt leaves recomputed by re-routing only the edited subtree's rows;
// untouched nodes (including their LeafState) are carried over. nullopt
// signals a minimum-observation violation, so proposal logic can retry.
std::optional<EditResult> apply_grow(const Tree& tree, const Dataset& data, int leaf,
                                     const DecisionRule& rule, int min_node_size);
EditResult apply_prune(const Tree& tree, const Dataset& data, int leaf_parent);
std::optional<EditResult> apply_change(const Tree& tree, const Dataset& data, int internal,
                                       const DecisionRule& rule, int min_node_size);
std::optional<EditResult> apply_swap(const Tree& tree, const Dataset& data, int parent, int child,
                                     int min_node_size);

}  // namespace bcart
