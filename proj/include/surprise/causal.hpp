#pragma once

// World machine as a weighted causal graph. Roots carry a prior cost C_W(c),
// edges c -> s carry the conditional cost C_W(s||c). The generation
// complexity of s is the cheapest prior-plus-path cost reaching s, which is
// the chain rule C_W(s) = min_c [C_W(s||c) + C_W(c)] applied recursively.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "surprise/core.hpp"

namespace surprise {

struct CausalNode {
  SymbolId id;
  std::optional<double> prior_bits;
};

struct CausalEdge {
  SymbolId from;
  SymbolId to;
  double bits = 0.0;
};

/// Immutable after construction; queries are safe from any number of threads.
class CausalGraph {
 public:
  CausalGraph(std::vector<CausalNode> nodes, std::vector<CausalEdge> edges)
      : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    bool any_root = false;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& n = nodes_[i];
      detail::require(index_.emplace(n.id, i).second, ErrorKind::invalid_argument,
                      "duplicate node '" + n.id.str() + "'");
      if (n.prior_bits) {
        check_cost(*n.prior_bits, "prior of '" + n.id.str() + "'");
        any_root = true;
      }
    }
    detail::require(any_root, ErrorKind::invalid_argument, "causal graph has no node with a prior");
    out_.resize(nodes_.size());
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      const auto& e = edges_[k];
      check_cost(e.bits, "edge '" + e.from.str() + "' -> '" + e.to.str() + "'");
      out_[node_index(e.from)].push_back({node_index(e.to), e.bits});
    }
  }

  /// Copy of this graph with one more edge.
  CausalGraph with_edge(CausalEdge edge) const {
    auto edges = edges_;
    edges.push_back(std::move(edge));
    return {nodes_, std::move(edges)};
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<CausalNode>& nodes() const noexcept { return nodes_; }
  const std::vector<CausalEdge>& edges() const noexcept { return edges_; }
  bool contains(const SymbolId& id) const { return index_.contains(id); }

  std::size_t node_index(const SymbolId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) detail::fail(ErrorKind::unknown_node, "no node '" + id.str() + "'");
    return it->second;
  }

  struct Arc {
    std::size_t to;
    double bits;
  };
  const std::vector<Arc>& out_arcs(std::size_t node) const { return out_.at(node); }

 private:
  static void check_cost(double bits, const std::string& what) {
    detail::require(std::isfinite(bits) && bits >= 0.0, ErrorKind::invalid_argument,
                    what + " must be a finite cost >= 0");
  }

  std::vector<CausalNode> nodes_;
  std::vector<CausalEdge> edges_;
  std::unordered_map<SymbolId, std::size_t> index_;
  std::vector<std::vector<Arc>> out_;
};

namespace detail {

struct MinCostTree {
  std::vector<double> cost;                  // +inf when unreachable
  std::vector<std::optional<std::size_t>> parent;  // nullopt: generated by its own prior
};

// Multi-source Dijkstra seeded with every prior. A node's parent is only ever
// taken from already-settled nodes, which keeps the tree acyclic even with
// zero-cost cycles. Equal-cost alternatives go to the cause with the smallest
// id, where a node's own prior counts as the node itself.
inline MinCostTree min_cost_tree(const CausalGraph& g) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = g.size();
  MinCostTree tree{std::vector<double>(n, inf), std::vector<std::optional<std::size_t>>(n)};
  std::vector<bool> settled(n, false);

  auto cause_of = [&](std::size_t v) -> const SymbolId& {
    return g.nodes()[tree.parent[v] ? *tree.parent[v] : v].id;
  };

  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
  for (std::size_t v = 0; v < n; ++v) {
    if (const auto& prior = g.nodes()[v].prior_bits) {
      tree.cost[v] = *prior;
      frontier.emplace(*prior, v);
    }
  }

  while (!frontier.empty()) {
    auto [d, u] = frontier.top();
    frontier.pop();
    if (settled[u] || d > tree.cost[u]) continue;
    settled[u] = true;
    for (const auto& arc : g.out_arcs(u)) {
      const std::size_t v = arc.to;
      if (settled[v]) continue;
      const double candidate = tree.cost[u] + arc.bits;
      const bool better = candidate < tree.cost[v];
      const bool tie_wins = candidate == tree.cost[v] && g.nodes()[u].id < cause_of(v);
      if (better || tie_wins) {
        tree.cost[v] = candidate;
        tree.parent[v] = u;
        if (better) frontier.emplace(candidate, v);
      }
    }
  }
  return tree;
}

}  // namespace detail

/// C_W(s): cheapest prior + path cost over all roots. +inf if unreachable.
inline BitLength generation_complexity(const CausalGraph& g, const SymbolId& s) {
  const std::size_t target = g.node_index(s);
  return BitLength(detail::min_cost_tree(g).cost[target]);
}

struct Explanation {
  SymbolId target;
  SymbolId best_cause;          // the target itself when its own prior is cheapest
  std::vector<SymbolId> chain;  // root first, target last
  BitLength generation_cost;
  Unexpectedness u;
};

/// Abduction: the minimising causal chain for s and U = C_W(s) - C_D(s).
inline Explanation explain(const CausalGraph& g, const SymbolId& s, BitLength c_d) {
  detail::require(c_d.is_finite(), ErrorKind::invalid_argument, "description cost must be finite");
  const std::size_t target = g.node_index(s);
  const auto tree = detail::min_cost_tree(g);
  const double cost = tree.cost[target];
  if (std::isinf(cost)) {
    detail::fail(ErrorKind::unreachable, "'" + s.str() + "' is not reachable from any root");
  }

  std::vector<SymbolId> chain;
  for (std::optional<std::size_t> v = target; v; v = tree.parent[*v]) {
    chain.push_back(g.nodes()[*v].id);
  }
  std::reverse(chain.begin(), chain.end());

  Explanation ex;
  ex.target = s;
  ex.best_cause = tree.parent[target] ? g.nodes()[*tree.parent[target]].id : s;
  ex.chain = std::move(chain);
  ex.generation_cost = BitLength(cost);
  ex.u = Unexpectedness::between(ex.generation_cost, c_d);
  return ex;
}

struct BayesCause {
  SymbolId id;
  double prior = 0.0;       // P(M_k)
  double likelihood = 0.0;  // P(O | M_k)
};

struct BayesModel {
  SymbolId observation;
  std::vector<BayesCause> causes;
  std::optional<double> evidence;  // P(O); total probability when absent
};

struct BayesGraph {
  CausalGraph graph;
  BitLength c_d;
};

/**
 * Maps an explicit probabilistic model onto costs: prior bits -log2 P(M_k) on
 * each cause, edge bits -log2 P(O|M_k) into the observation, and
 * C_D = -log2 P(O). Zero probabilities are rejected; omit the cause instead.
 */
inline BayesGraph from_probabilities(const BayesModel& model) {
  auto check = [](double p, const std::string& what) {
    detail::require(p > 0.0 && p <= 1.0, ErrorKind::invalid_argument,
                    what + " must lie in (0,1], got " + std::to_string(p));
  };
  detail::require(!model.causes.empty(), ErrorKind::invalid_argument, "model has no causes");

  std::vector<CausalNode> nodes;
  std::vector<CausalEdge> edges;
  double prior_total = 0.0;
  double total_probability = 0.0;
  for (const auto& c : model.causes) {
    check(c.prior, "prior of '" + c.id.str() + "'");
    check(c.likelihood, "likelihood of '" + c.id.str() + "'");
    detail::require(c.id != model.observation, ErrorKind::invalid_argument,
                    "cause id collides with the observation id");
    prior_total += c.prior;
    total_probability += c.prior * c.likelihood;
    nodes.push_back({c.id, bits_from_probability(c.prior).value()});
    edges.push_back({c.id, model.observation, bits_from_probability(c.likelihood).value()});
  }
  detail::require(prior_total <= 1.0 + kMassTolerance, ErrorKind::invalid_argument,
                  "priors sum to " + std::to_string(prior_total) + " > 1");
  nodes.push_back({model.observation, std::nullopt});

  const double evidence = model.evidence.value_or(total_probability);
  check(evidence, "evidence");
  return {CausalGraph(std::move(nodes), std::move(edges)), bits_from_probability(evidence)};
}

}  // namespace surprise
