#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bcart/dataset.hpp"
#include "bcart/rng.hpp"
#include "bcart/tree.hpp"

namespace bcart {

struct TreePriorConfig {
  double gamma = 0.95;        // branching probability scale, in (0,1]
  double rho = 2.0;           // depth penalty exponent, >= 0
  int numeric_grid_size = 100;
  int min_node_size = 10;

  void validate() const;
};

// Numeric split grids: observed quantiles of each numeric variable,
// computed once on the full training set, sorted and deduplicated.
// Categorical variables carry no precomputed state; their cut points are
// the empirical-frequency-ordered level prefixes of the node at hand.
struct SplitCandidateSet {
  std::vector<std::vector<double>> numeric_grid;  // empty for categoricals
};

SplitCandidateSet build_candidates(const Dataset& train, int numeric_grid_size);

// p(d) = gamma * (1+d)^(-rho), clamped to at most 1.
double split_probability(int depth, const TreePriorConfig& config);

// Feasibility context for enumerating the rules available at a node. Rows
// routed left land in per-row left buckets (the would-be leaves of the left
// subtree), and symmetrically on the right; a rule is feasible when every
// bucket keeps at least min_node_size rows. A fresh Grow and the prior's
// node-local measure use one bucket per side; Change and Swap use the
// actual subtree leaves.
struct SplitContext {
  std::vector<RowIndex> rows;
  std::vector<int> bucket_left;   // per row, parallel to rows
  std::vector<int> bucket_right;
  int n_left_buckets = 1;
  int n_right_buckets = 1;
  int min_node_size = 1;
};

SplitContext make_leaf_context(const std::vector<RowIndex>& rows, int min_node_size);
// Buckets follow the leaves of the subtrees hanging off the internal node.
SplitContext make_subtree_context(const Tree& tree, const Dataset& data, int internal,
                                  int min_node_size);

struct FeasibleCut {
  double threshold = 0.0;      // numeric
  std::uint64_t subset = 0;    // categorical prefix mask
};

struct VariableCuts {
  int variable = -1;
  std::vector<FeasibleCut> cuts;
};

struct RuleEnumeration {
  std::vector<VariableCuts> vars;  // only variables with >= 1 feasible cut

  bool empty() const { return vars.empty(); }
  int n_vars() const { return static_cast<int>(vars.size()); }
  // Proposal measure of a concrete rule: (#vars, #cuts of its variable), or
  // nullopt when the rule is not reachable under this enumeration.
  std::optional<std::pair<int, int>> measure_of(const DecisionRule& rule) const;
};

RuleEnumeration enumerate_feasible_rules(const Dataset& data, const SplitCandidateSet& candidates,
                                         const SplitContext& ctx);

// Uniform variable among feasible, uniform cut within the variable; the
// without-replacement retry over infeasible candidates collapses to exactly
// this measure. nullopt when the node is exhausted.
struct ProposedRule {
  DecisionRule rule;
  int n_vars = 0;
  int n_cuts = 0;
};
std::optional<ProposedRule> propose_rule(const RuleEnumeration& enumeration, Rng& rng);

bool leaf_growable(const Dataset& data, const SplitCandidateSet& candidates,
                   const std::vector<RowIndex>& rows, int min_node_size);

// Log prior of the full tree under the branching-process topology prior and
// the node-local rule measure (uniform feasible variable x uniform feasible
// cut). Leaves that cannot split contribute log 1. -inf when some internal
// rule is not reachable by the measure.
double log_tree_prior(const Tree& tree, const Dataset& data, const SplitCandidateSet& candidates,
                      const TreePriorConfig& config);

// Per-node prior terms, used for incremental prior deltas.
double prior_internal_term(const Dataset& data, const SplitCandidateSet& candidates,
                           const TreePriorConfig& config, const std::vector<RowIndex>& rows,
                           int depth, const DecisionRule& rule);
double prior_leaf_term(const TreePriorConfig& config, int depth, bool growable);

}  // namespace bcart
