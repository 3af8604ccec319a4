#include "bcart/tree.hpp"

#include <algorithm>
#include <cmath>

#include "bcart/numeric.hpp"

namespace bcart {

int Tree::n_leaves() const {
  int b = 0;
  for (const auto& n : nodes) b += n.is_leaf;
  return b;
}

std::vector<int> Tree::leaves() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].is_leaf) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> Tree::internals() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (!nodes[i].is_leaf) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> Tree::leaf_parents() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (!n.is_leaf && nodes[n.left].is_leaf && nodes[n.right].is_leaf)
      out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> Tree::leaves_under(int node) const {
  std::vector<int> out, stack{node};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    if (nodes[id].is_leaf) {
      out.push_back(id);
    } else {
      stack.push_back(nodes[id].right);
      stack.push_back(nodes[id].left);
    }
  }
  return out;
}

std::vector<int> Tree::internals_under(int node) const {
  std::vector<int> out, stack{node};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    if (!nodes[id].is_leaf) {
      out.push_back(id);
      stack.push_back(nodes[id].right);
      stack.push_back(nodes[id].left);
    }
  }
  return out;
}

std::vector<int> Tree::variable_usage(std::size_t n_variables) const {
  std::vector<int> usage(n_variables, 0);
  for (const auto& n : nodes)
    if (!n.is_leaf) ++usage[n.rule.variable];
  return usage;
}

NodeSuffStats compute_stats(const Dataset& data, const std::vector<RowIndex>& rows) {
  NodeSuffStats s;
  s.n = static_cast<std::int64_t>(rows.size());
  for (RowIndex r : rows) {
    const double v = data.exposure[r];
    const std::int64_t m = data.claims[r];
    s.sum_claims += m;
    s.sum_exposure += v;
    s.sum_exposure_sq += v * v;
    s.sum_claims_sq_over_v += static_cast<double>(m) * static_cast<double>(m) / v;
    s.sum_log_claims_factorial += log_factorial(m);
    s.sum_claims_log_v += static_cast<double>(m) * std::log(v);
  }
  return s;
}

bool rule_sends_left(const DecisionRule& rule, const Dataset& data, RowIndex row) {
  const auto& spec = data.schema.variables[rule.variable];
  if (spec.kind == VariableKind::kNumeric)
    return data.numeric_value(rule.variable, row) < rule.threshold;
  const std::int32_t level = data.level_of(rule.variable, row);
  if (level < 0 || static_cast<std::size_t>(level) >= spec.levels.size())
    throw Error("route: unknown level index " + std::to_string(level) + " for variable '" +
                spec.name + "'");
  return (rule.subset >> level) & 1u;
}

Tree make_root_tree(const Dataset& data) {
  Tree t;
  Node n;
  n.is_leaf = true;
  n.depth = 0;
  auto rows = std::make_shared<std::vector<RowIndex>>();
  rows->reserve(data.n_rows());
  for (std::size_t i = 0; i < data.n_rows(); ++i) rows->push_back(static_cast<RowIndex>(i));
  n.rows = rows;
  n.stats = compute_stats(data, *rows);
  t.nodes.push_back(std::move(n));
  return t;
}

int route(const Tree& tree, const Dataset& data, RowIndex row) {
  int id = tree.root();
  while (!tree.nodes[id].is_leaf)
    id = rule_sends_left(tree.nodes[id].rule, data, row) ? tree.nodes[id].left : tree.nodes[id].right;
  return id;
}

namespace {

// Recursive rebuild helpers. Node ids are reassigned depth-first, so every
// edit yields a compact arena.

int clone_subtree(const Tree& src, int src_id, int depth, Tree& dst) {
  const Node& sn = src.nodes[src_id];
  const int id = static_cast<int>(dst.nodes.size());
  dst.nodes.push_back(sn);
  dst.nodes[id].depth = depth;
  if (!sn.is_leaf) {
    const int l = clone_subtree(src, sn.left, depth + 1, dst);
    const int r = clone_subtree(src, sn.right, depth + 1, dst);
    dst.nodes[id].left = l;
    dst.nodes[id].right = r;
  }
  return id;
}

int make_leaf(const Dataset& data, RowSet rows, int depth, Tree& dst, std::vector<int>& new_leaves) {
  Node n;
  n.is_leaf = true;
  n.depth = depth;
  n.stats = compute_stats(data, *rows);
  n.rows = std::move(rows);
  const int id = static_cast<int>(dst.nodes.size());
  dst.nodes.push_back(std::move(n));
  new_leaves.push_back(id);
  return id;
}

// Rebuilds the structure of src's subtree with the given rows routed
// through it. rule_at lets the caller override the rule of specific source
// nodes (change, swap). Returns -1 on a minimum-observation violation.
int reroute_subtree(const Tree& src, const Dataset& data, int src_id, int depth,
                    const std::vector<RowIndex>& rows, Tree& dst,
                    const std::vector<std::pair<int, DecisionRule>>& overrides, int min_node_size,
                    std::vector<int>& new_leaves) {
  const Node& sn = src.nodes[src_id];
  if (sn.is_leaf) {
    if (static_cast<int>(rows.size()) < min_node_size) return -1;
    return make_leaf(data, std::make_shared<std::vector<RowIndex>>(rows), depth, dst, new_leaves);
  }
  DecisionRule rule = sn.rule;
  for (const auto& [id, r] : overrides)
    if (id == src_id) rule = r;
  std::vector<RowIndex> left_rows, right_rows;
  for (RowIndex r : rows)
    (rule_sends_left(rule, data, r) ? left_rows : right_rows).push_back(r);

  const int id = static_cast<int>(dst.nodes.size());
  Node n;
  n.is_leaf = false;
  n.depth = depth;
  n.rule = rule;
  dst.nodes.push_back(std::move(n));
  const int l = reroute_subtree(src, data, sn.left, depth + 1, left_rows, dst, overrides,
                                min_node_size, new_leaves);
  if (l < 0) return -1;
  const int r = reroute_subtree(src, data, sn.right, depth + 1, right_rows, dst, overrides,
                                min_node_size, new_leaves);
  if (r < 0) return -1;
  dst.nodes[id].left = l;
  dst.nodes[id].right = r;
  return id;
}

// Clones src into dst except at edit_target, where build_edit emits the
// replacement subtree (returning -1 to abort).
template <typename BuildEdit>
std::optional<Tree> rebuild_with_edit(const Tree& src, int edit_target, BuildEdit&& build_edit) {
  Tree dst;
  dst.nodes.reserve(src.nodes.size() + 2);
  bool failed = false;
  auto build = [&](auto&& self, int src_id, int depth) -> int {
    if (failed) return -1;
    if (src_id == edit_target) {
      const int id = build_edit(dst, depth);
      if (id < 0) failed = true;
      return id;
    }
    const Node& sn = src.nodes[src_id];
    if (sn.is_leaf) return clone_subtree(src, src_id, depth, dst);
    const int id = static_cast<int>(dst.nodes.size());
    dst.nodes.push_back(sn);
    dst.nodes[id].depth = depth;
    const int l = self(self, sn.left, depth + 1);
    const int r = self(self, sn.right, depth + 1);
    if (failed) return -1;
    dst.nodes[id].left = l;
    dst.nodes[id].right = r;
    return id;
  };
  build(build, src.root(), 0);
  if (failed) return std::nullopt;
  return dst;
}

}  // namespace

std::optional<EditResult> apply_grow(const Tree& tree, const Dataset& data, int leaf,
                                     const DecisionRule& rule, int min_node_size) {
  const Node& ln = tree.nodes[leaf];
  std::vector<RowIndex> left_rows, right_rows;
  for (RowIndex r : *ln.rows)
    (rule_sends_left(rule, data, r) ? left_rows : right_rows).push_back(r);
  if (static_cast<int>(left_rows.size()) < min_node_size ||
      static_cast<int>(right_rows.size()) < min_node_size)
    return std::nullopt;

  EditResult res;
  auto built = rebuild_with_edit(tree, leaf, [&](Tree& dst, int depth) {
    const int id = static_cast<int>(dst.nodes.size());
    Node n;
    n.is_leaf = false;
    n.depth = depth;
    n.rule = rule;
    dst.nodes.push_back(std::move(n));
    const int l = make_leaf(data, std::make_shared<std::vector<RowIndex>>(std::move(left_rows)),
                            depth + 1, dst, res.new_leaves);
    const int r = make_leaf(data, std::make_shared<std::vector<RowIndex>>(std::move(right_rows)),
                            depth + 1, dst, res.new_leaves);
    dst.nodes[id].left = l;
    dst.nodes[id].right = r;
    return id;
  });
  res.tree = std::move(*built);
  return res;
}

EditResult apply_prune(const Tree& tree, const Dataset& data, int leaf_parent) {
  const Node& pn = tree.nodes[leaf_parent];
  if (pn.is_leaf || !tree.nodes[pn.left].is_leaf || !tree.nodes[pn.right].is_leaf)
    throw Error("prune: target is not a parent of two leaves");
  const auto& lrows = *tree.nodes[pn.left].rows;
  const auto& rrows = *tree.nodes[pn.right].rows;
  auto merged = std::make_shared<std::vector<RowIndex>>();
  merged->resize(lrows.size() + rrows.size());
  std::merge(lrows.begin(), lrows.end(), rrows.begin(), rrows.end(), merged->begin());

  EditResult res;
  auto built = rebuild_with_edit(tree, leaf_parent, [&](Tree& dst, int depth) {
    return make_leaf(data, merged, depth, dst, res.new_leaves);
  });
  res.tree = std::move(*built);
  return res;
}

std::optional<EditResult> apply_change(const Tree& tree, const Dataset& data, int internal,
                                       const DecisionRule& rule, int min_node_size) {
  const Node& n = tree.nodes[internal];
  if (n.is_leaf) throw Error("change: target is a leaf");
  // Rows reaching the node are the union of its subtree's leaf rows.
  std::vector<RowIndex> rows;
  for (int leaf : tree.leaves_under(internal))
    rows.insert(rows.end(), tree.nodes[leaf].rows->begin(), tree.nodes[leaf].rows->end());
  std::sort(rows.begin(), rows.end());

  EditResult res;
  auto built = rebuild_with_edit(tree, internal, [&](Tree& dst, int depth) {
    return reroute_subtree(tree, data, internal, depth, rows, dst, {{internal, rule}},
                           min_node_size, res.new_leaves);
  });
  if (!built) return std::nullopt;
  res.tree = std::move(*built);
  return res;
}

std::optional<EditResult> apply_swap(const Tree& tree, const Dataset& data, int parent, int child,
                                     int min_node_size) {
  const Node& pn = tree.nodes[parent];
  const Node& cn = tree.nodes[child];
  if (pn.is_leaf || cn.is_leaf) throw Error("swap: both nodes must be internal");
  if (pn.left != child && pn.right != child) throw Error("swap: nodes are not parent and child");
  std::vector<RowIndex> rows;
  for (int leaf : tree.leaves_under(parent))
    rows.insert(rows.end(), tree.nodes[leaf].rows->begin(), tree.nodes[leaf].rows->end());
  std::sort(rows.begin(), rows.end());

  EditResult res;
  auto built = rebuild_with_edit(tree, parent, [&](Tree& dst, int depth) {
    return reroute_subtree(tree, data, parent, depth, rows, dst,
                           {{parent, cn.rule}, {child, pn.rule}}, min_node_size, res.new_leaves);
  });
  if (!built) return std::nullopt;
  res.tree = std::move(*built);
  return res;
}

}  // namespace bcart
