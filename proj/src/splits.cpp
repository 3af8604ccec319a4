#include "bcart/splits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bcart {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void TreePriorConfig::validate() const {
  if (!(gamma > 0.0) || gamma > 1.0) throw Error("tree prior: gamma must be in (0,1]");
  if (!(rho >= 0.0)) throw Error("tree prior: rho must be >= 0");
  if (numeric_grid_size < 2) throw Error("tree prior: numeric grid size must be >= 2");
  if (min_node_size < 1) throw Error("tree prior: min node size must be >= 1");
}

SplitCandidateSet build_candidates(const Dataset& train, int numeric_grid_size) {
  SplitCandidateSet cands;
  cands.numeric_grid.resize(train.n_variables());
  for (std::size_t v = 0; v < train.n_variables(); ++v) {
    if (train.schema.variables[v].kind != VariableKind::kNumeric) continue;
    std::vector<double> sorted = train.columns[v].numeric;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    if (n == 0) continue;
    auto& grid = cands.numeric_grid[v];
    for (int k = 1; k <= numeric_grid_size; ++k) {
      const double q = static_cast<double>(k) / (numeric_grid_size + 1.0);
      std::size_t idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
      if (idx > 0) --idx;
      if (idx >= n) idx = n - 1;
      grid.push_back(sorted[idx]);
    }
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  }
  return cands;
}

double split_probability(int depth, const TreePriorConfig& config) {
  const double p = config.gamma * std::pow(1.0 + depth, -config.rho);
  return p > 1.0 ? 1.0 : p;
}

SplitContext make_leaf_context(const std::vector<RowIndex>& rows, int min_node_size) {
  SplitContext ctx;
  ctx.rows = rows;
  ctx.bucket_left.assign(rows.size(), 0);
  ctx.bucket_right.assign(rows.size(), 0);
  ctx.min_node_size = min_node_size;
  return ctx;
}

SplitContext make_subtree_context(const Tree& tree, const Dataset& data, int internal,
                                  int min_node_size) {
  const Node& n = tree.nodes[internal];
  SplitContext ctx;
  ctx.min_node_size = min_node_size;
  for (int leaf : tree.leaves_under(internal))
    ctx.rows.insert(ctx.rows.end(), tree.nodes[leaf].rows->begin(), tree.nodes[leaf].rows->end());
  std::sort(ctx.rows.begin(), ctx.rows.end());

  // Bucket = index of the landing leaf within the child subtree, counting
  // leaves of branches skipped to the left on the way down.
  auto precount = [&](int subtree_root, std::vector<int>& leaf_counts) {
    leaf_counts.assign(tree.nodes.size(), 0);
    for (int id : tree.internals_under(subtree_root))
      leaf_counts[id] = static_cast<int>(tree.leaves_under(tree.nodes[id].left).size());
    (void)subtree_root;
  };
  std::vector<int> left_leafcnt, right_leafcnt;
  precount(n.left, left_leafcnt);
  precount(n.right, right_leafcnt);
  auto route_in = [&](int subtree_root, const std::vector<int>& leafcnt, RowIndex row) {
    int id = subtree_root;
    int bucket = 0;
    while (!tree.nodes[id].is_leaf) {
      if (rule_sends_left(tree.nodes[id].rule, data, row)) {
        id = tree.nodes[id].left;
      } else {
        bucket += leafcnt[id];
        id = tree.nodes[id].right;
      }
    }
    return bucket;
  };

  ctx.n_left_buckets = static_cast<int>(tree.leaves_under(n.left).size());
  ctx.n_right_buckets = static_cast<int>(tree.leaves_under(n.right).size());
  ctx.bucket_left.reserve(ctx.rows.size());
  ctx.bucket_right.reserve(ctx.rows.size());
  for (RowIndex r : ctx.rows) {
    ctx.bucket_left.push_back(route_in(n.left, left_leafcnt, r));
    ctx.bucket_right.push_back(route_in(n.right, right_leafcnt, r));
  }
  return ctx;
}

namespace {

// Feasible numeric cuts for one variable. bin(x) = #grid values <= x, so
// x < grid[cut] exactly when bin(x) <= cut; per-bucket prefix counts over
// bins give both child sizes for every cut in one pass.
void numeric_cuts(const Dataset& data, const std::vector<double>& grid, const SplitContext& ctx,
                  int variable, VariableCuts& out) {
  const std::size_t g = grid.size();
  if (g == 0) return;
  const std::size_t bl = ctx.n_left_buckets, br = ctx.n_right_buckets;
  std::vector<std::int32_t> hist_l(bl * (g + 1), 0), hist_r(br * (g + 1), 0);
  for (std::size_t i = 0; i < ctx.rows.size(); ++i) {
    const double x = data.numeric_value(variable, ctx.rows[i]);
    const std::size_t bin = std::upper_bound(grid.begin(), grid.end(), x) - grid.begin();
    ++hist_l[ctx.bucket_left[i] * (g + 1) + bin];
    ++hist_r[ctx.bucket_right[i] * (g + 1) + bin];
  }
  std::vector<std::int32_t> below_l(bl, 0), below_r(br, 0), total_r(br, 0);
  for (std::size_t b = 0; b < br; ++b)
    total_r[b] = std::accumulate(hist_r.begin() + b * (g + 1), hist_r.begin() + (b + 1) * (g + 1),
                                 std::int32_t{0});
  for (std::size_t cut = 0; cut < g; ++cut) {
    for (std::size_t b = 0; b < bl; ++b) below_l[b] += hist_l[b * (g + 1) + cut];
    for (std::size_t b = 0; b < br; ++b) below_r[b] += hist_r[b * (g + 1) + cut];
    bool ok = true;
    for (std::size_t b = 0; b < bl && ok; ++b) ok = below_l[b] >= ctx.min_node_size;
    for (std::size_t b = 0; b < br && ok; ++b) ok = total_r[b] - below_r[b] >= ctx.min_node_size;
    if (ok) out.cuts.push_back(FeasibleCut{grid[cut], 0});
  }
}

// Feasible categorical prefixes: order the node's available levels by
// empirical frequency (claims per exposure, declaration order on ties);
// cut j sends the first j levels left.
void categorical_cuts(const Dataset& data, const SplitContext& ctx, int variable,
                      VariableCuts& out) {
  const std::size_t n_levels = data.schema.variables[variable].levels.size();
  if (n_levels < 2) return;
  const std::size_t bl = ctx.n_left_buckets, br = ctx.n_right_buckets;
  std::vector<std::int64_t> level_claims(n_levels, 0);
  std::vector<double> level_expo(n_levels, 0.0);
  std::vector<std::int32_t> level_n(n_levels, 0);
  std::vector<std::int32_t> cnt_l(n_levels * bl, 0), cnt_r(n_levels * br, 0);
  for (std::size_t i = 0; i < ctx.rows.size(); ++i) {
    const RowIndex r = ctx.rows[i];
    const std::size_t k = data.level_of(variable, r);
    ++level_n[k];
    level_claims[k] += data.claims[r];
    level_expo[k] += data.exposure[r];
    ++cnt_l[k * bl + ctx.bucket_left[i]];
    ++cnt_r[k * br + ctx.bucket_right[i]];
  }
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < n_levels; ++k)
    if (level_n[k] > 0) order.push_back(k);
  if (order.size() < 2) return;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return level_claims[a] * level_expo[b] < level_claims[b] * level_expo[a];
  });

  std::vector<std::int32_t> left_cnt(bl, 0), gone_r(br, 0), total_r(br, 0);
  for (std::size_t b = 0; b < br; ++b)
    for (std::size_t k = 0; k < n_levels; ++k) total_r[b] += cnt_r[k * br + b];
  std::uint64_t mask = 0;
  for (std::size_t j = 0; j + 1 < order.size(); ++j) {
    const std::size_t k = order[j];
    mask |= std::uint64_t{1} << k;
    for (std::size_t b = 0; b < bl; ++b) left_cnt[b] += cnt_l[k * bl + b];
    for (std::size_t b = 0; b < br; ++b) gone_r[b] += cnt_r[k * br + b];
    bool ok = true;
    for (std::size_t b = 0; b < bl && ok; ++b) ok = left_cnt[b] >= ctx.min_node_size;
    for (std::size_t b = 0; b < br && ok; ++b) ok = total_r[b] - gone_r[b] >= ctx.min_node_size;
    if (ok) out.cuts.push_back(FeasibleCut{0.0, mask});
  }
}

}  // namespace

RuleEnumeration enumerate_feasible_rules(const Dataset& data, const SplitCandidateSet& candidates,
                                         const SplitContext& ctx) {
  RuleEnumeration out;
  for (std::size_t v = 0; v < data.n_variables(); ++v) {
    VariableCuts vc;
    vc.variable = static_cast<int>(v);
    if (data.schema.variables[v].kind == VariableKind::kNumeric)
      numeric_cuts(data, candidates.numeric_grid[v], ctx, vc.variable, vc);
    else
      categorical_cuts(data, ctx, vc.variable, vc);
    if (!vc.cuts.empty()) out.vars.push_back(std::move(vc));
  }
  return out;
}

std::optional<std::pair<int, int>> RuleEnumeration::measure_of(const DecisionRule& rule) const {
  for (const auto& vc : vars) {
    if (vc.variable != rule.variable) continue;
    for (const auto& c : vc.cuts) {
      const bool match = rule.subset != 0 ? c.subset == rule.subset : c.threshold == rule.threshold;
      if (match) return std::make_pair(n_vars(), static_cast<int>(vc.cuts.size()));
    }
    return std::nullopt;
  }
  return std::nullopt;
}

std::optional<ProposedRule> propose_rule(const RuleEnumeration& enumeration, Rng& rng) {
  if (enumeration.empty()) return std::nullopt;
  const auto& vc = enumeration.vars[rng.uniform_int(enumeration.vars.size())];
  const auto& cut = vc.cuts[rng.uniform_int(vc.cuts.size())];
  ProposedRule p;
  p.rule.variable = vc.variable;
  p.rule.threshold = cut.threshold;
  p.rule.subset = cut.subset;
  p.n_vars = enumeration.n_vars();
  p.n_cuts = static_cast<int>(vc.cuts.size());
  return p;
}

bool leaf_growable(const Dataset& data, const SplitCandidateSet& candidates,
                   const std::vector<RowIndex>& rows, int min_node_size) {
  if (static_cast<int>(rows.size()) < 2 * min_node_size) return false;
  const SplitContext ctx = make_leaf_context(rows, min_node_size);
  // Short-circuit on the first variable with a feasible cut.
  for (std::size_t v = 0; v < data.n_variables(); ++v) {
    VariableCuts vc;
    vc.variable = static_cast<int>(v);
    if (data.schema.variables[v].kind == VariableKind::kNumeric)
      numeric_cuts(data, candidates.numeric_grid[v], ctx, vc.variable, vc);
    else
      categorical_cuts(data, ctx, vc.variable, vc);
    if (!vc.cuts.empty()) return true;
  }
  return false;
}

double prior_internal_term(const Dataset& data, const SplitCandidateSet& candidates,
                           const TreePriorConfig& config, const std::vector<RowIndex>& rows,
                           int depth, const DecisionRule& rule) {
  const auto enumeration =
      enumerate_feasible_rules(data, candidates, make_leaf_context(rows, config.min_node_size));
  const auto measure = enumeration.measure_of(rule);
  if (!measure) return kNegInf;
  return std::log(split_probability(depth, config)) - std::log(measure->first) -
         std::log(measure->second);
}

double prior_leaf_term(const TreePriorConfig& config, int depth, bool growable) {
  if (!growable) return 0.0;
  const double p = split_probability(depth, config);
  if (p >= 1.0) return kNegInf;
  return std::log1p(-p);
}

double log_tree_prior(const Tree& tree, const Dataset& data, const SplitCandidateSet& candidates,
                      const TreePriorConfig& config) {
  double total = 0.0;
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    const Node& n = tree.nodes[id];
    if (n.is_leaf) {
      total += prior_leaf_term(config, n.depth,
                               leaf_growable(data, candidates, *n.rows, config.min_node_size));
    } else {
      std::vector<RowIndex> rows;
      for (int leaf : tree.leaves_under(static_cast<int>(id)))
        rows.insert(rows.end(), tree.nodes[leaf].rows->begin(), tree.nodes[leaf].rows->end());
      std::sort(rows.begin(), rows.end());
      total += prior_internal_term(data, candidates, config, rows, n.depth, n.rule);
      if (total == kNegInf) return kNegInf;
    }
  }
  return total;
}

}  // namespace bcart
