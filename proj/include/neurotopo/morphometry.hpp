#pragma once

// Per-tree and per-population morphometrics: size, topological length and
// width, node classes, partition asymmetry, excess asymmetry, total length.

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neurotopo/errors.hpp"
#include "neurotopo/stats.hpp"
#include "neurotopo/topology.hpp"
#include "neurotopo/tree.hpp"

namespace neurotopo {

/// |r - s| / (r + s - 2); undefined for (1, 1).
inline double partition_asymmetry(std::size_t r, std::size_t s) {
  if (r < 1 || s < 1) throw DomainError("partition sizes must be positive");
  if (r == 1 && s == 1) throw DomainError("partition asymmetry is undefined for (1,1)");
  const double diff = r > s ? static_cast<double>(r - s) : static_cast<double>(s - r);
  return diff / static_cast<double>(r + s - 2);
}

struct NodeAverage {
  std::optional<double> value;
  std::size_t eligible = 0;
};

/// Unweighted mean of partition asymmetry over branching nodes other than (1,1).
inline NodeAverage tree_asymmetry(const NeuronTree& tree) {
  NodeAverage out;
  double sum = 0.0;
  for (const auto& p : subtree_counts(tree)) {
    if (p.r == 1 && p.s == 1) continue;
    sum += partition_asymmetry(p.r, p.s);
    ++out.eligible;
  }
  if (out.eligible) out.value = sum / static_cast<double>(out.eligible);
  return out;
}

/// Excess of the observed partition asymmetry over its mean across the
/// three pairings of four granddaughter subtree sizes (g0 g1 | g2 g3 observed).
inline std::optional<double> node_excess_asymmetry(const std::array<std::size_t, 4>& g) {
  static constexpr std::array<std::array<int, 4>, 3> pairings{{{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}}};
  const std::size_t obs_r = g[0] + g[1], obs_s = g[2] + g[3];
  if (obs_r == 1 && obs_s == 1) return std::nullopt;
  double sum = 0.0;
  int used = 0;
  for (const auto& p : pairings) {
    const std::size_t r = g[static_cast<std::size_t>(p[0])] + g[static_cast<std::size_t>(p[1])];
    const std::size_t s = g[static_cast<std::size_t>(p[2])] + g[static_cast<std::size_t>(p[3])];
    if (r == 1 && s == 1) continue;
    sum += partition_asymmetry(r, s);
    ++used;
  }
  if (used == 0) return std::nullopt;
  return partition_asymmetry(obs_r, obs_s) - sum / used;
}

/// Mean node excess over B-type nodes (both daughters branch).
inline NodeAverage excess_asymmetry(const NeuronTree& tree) {
  const auto count = terminal_counts(tree);
  const auto& nodes = tree.nodes();
  auto at = [&](NodeIndex i) -> const TreeNode& { return nodes[static_cast<std::size_t>(i)]; };
  NodeAverage out;
  double sum = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.child_count() != 2) continue;
    const auto& left = at(n.children[0]);
    const auto& right = at(n.children[1]);
    if (left.child_count() != 2 || right.child_count() != 2) continue;
    const std::array<std::size_t, 4> g{count[static_cast<std::size_t>(left.children[0])],
                                       count[static_cast<std::size_t>(left.children[1])],
                                       count[static_cast<std::size_t>(right.children[0])],
                                       count[static_cast<std::size_t>(right.children[1])]};
    if (auto e = node_excess_asymmetry(g)) {
      sum += *e;
      ++out.eligible;
    }
  }
  if (out.eligible) out.value = sum / static_cast<double>(out.eligible);
  return out;
}

/// Sum of all edge lengths in um; nullopt for trees without geometry.
inline std::optional<double> total_length(const NeuronTree& tree) {
  if (!tree.has_lengths()) return std::nullopt;
  double sum = 0.0;
  for (const auto& n : tree.nodes()) sum += n.edge_length;
  return sum;
}

struct TreeMetrics {
  TreeKind kind = TreeKind::dendrite;
  std::size_t n = 0;  // branching nodes
  int k_max = 0;
  std::size_t j_max = 0;
  double b_frac = 0.0, m_frac = 0.0, s_frac = 0.0;
  std::optional<double> asymmetry;
  std::optional<double> excess_asymmetry;
  std::optional<double> total_length;
  std::size_t eligible_a = 0;
  std::size_t eligible_ep = 0;
};

inline TreeMetrics compute_metrics(const NeuronTree& tree) {
  TreeMetrics m;
  m.kind = tree.kind();
  const auto prof = order_profile(tree);
  const auto classes = classify_nodes(tree);
  m.n = classes.total();
  m.k_max = prof.k_max;
  m.j_max = prof.j_max;
  if (m.n) {
    const double n = static_cast<double>(m.n);
    m.b_frac = static_cast<double>(classes.b) / n;
    m.m_frac = static_cast<double>(classes.m) / n;
    m.s_frac = static_cast<double>(classes.s) / n;
  }
  const auto a = tree_asymmetry(tree);
  m.asymmetry = a.value;
  m.eligible_a = a.eligible;
  const auto e = excess_asymmetry(tree);
  m.excess_asymmetry = e.value;
  m.eligible_ep = e.eligible;
  m.total_length = total_length(tree);
  return m;
}

struct OrderLengthStat {
  int order = 0;
  double mean = 0.0;
  std::optional<double> sem;
  std::size_t n = 0;
};

/// Mean and sem of edge lengths grouped by the order of the edge's lower
/// node. Trees without geometry are skipped; empty orders are omitted.
inline std::vector<OrderLengthStat> branch_length_by_order(std::span<const NeuronTree> trees) {
  std::map<int, std::vector<double>> by_order;
  for (const auto& t : trees) {
    if (!t.has_lengths()) continue;
    const auto& nodes = t.nodes();
    for (std::size_t i = 1; i < nodes.size(); ++i) by_order[nodes[i].order].push_back(nodes[i].edge_length);
  }
  std::vector<OrderLengthStat> out;
  for (const auto& [k, lengths] : by_order) {
    const auto s = summarize_sample(lengths);
    out.push_back({k, s.mean, s.sem, s.n});
  }
  return out;
}

struct ConditionalMean {
  std::size_t n = 0;      // tree size N of the group
  std::size_t count = 0;  // trees in the group
  double k_max = 0.0;
  double j_max = 0.0;
};

/// <k_max|N> and <j_max|N> over exact-N groups with at least `min_group_size` trees.
inline std::vector<ConditionalMean> conditional_means(std::span<const TreeMetrics> metrics,
                                                      std::size_t min_group_size = 1) {
  std::map<std::size_t, ConditionalMean> groups;
  for (const auto& m : metrics) {
    auto& g = groups[m.n];
    g.n = m.n;
    ++g.count;
    g.k_max += m.k_max;
    g.j_max += static_cast<double>(m.j_max);
  }
  std::vector<ConditionalMean> out;
  for (auto& [n, g] : groups) {
    if (g.count < min_group_size) continue;
    g.k_max /= static_cast<double>(g.count);
    g.j_max /= static_cast<double>(g.count);
    out.push_back(g);
  }
  return out;
}

struct PopulationSummary {
  std::size_t trees = 0;
  SampleSummary n, k_max, j_max, b_frac, m_frac, s_frac;
  SampleSummary asymmetry;          // trees with defined A only
  SampleSummary excess_asymmetry;   // trees with defined E_p only
  SampleSummary total_length;       // trees with geometry only
  std::vector<ConditionalMean> conditional;
};

/// Use min_group_size = 1 for reconstructed data and 10 for simulated populations.
inline PopulationSummary summarize(std::span<const TreeMetrics> metrics, std::size_t min_group_size = 1) {
  if (metrics.empty()) throw DomainError("cannot summarize an empty population");
  std::vector<double> n, k, j, b, m, s, a, e, l;
  for (const auto& t : metrics) {
    n.push_back(static_cast<double>(t.n));
    k.push_back(t.k_max);
    j.push_back(static_cast<double>(t.j_max));
    b.push_back(t.b_frac);
    m.push_back(t.m_frac);
    s.push_back(t.s_frac);
    if (t.asymmetry) a.push_back(*t.asymmetry);
    if (t.excess_asymmetry) e.push_back(*t.excess_asymmetry);
    if (t.total_length) l.push_back(*t.total_length);
  }
  PopulationSummary out;
  out.trees = metrics.size();
  out.n = summarize_sample(n);
  out.k_max = summarize_sample(k);
  out.j_max = summarize_sample(j);
  out.b_frac = summarize_sample(b);
  out.m_frac = summarize_sample(m);
  out.s_frac = summarize_sample(s);
  out.asymmetry = summarize_sample(a);
  out.excess_asymmetry = summarize_sample(e);
  out.total_length = summarize_sample(l);
  out.conditional = conditional_means(metrics, min_group_size);
  return out;
}

}  // namespace neurotopo
