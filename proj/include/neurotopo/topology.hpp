#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "neurotopo/tree.hpp"

namespace neurotopo {

/// Per-order node accounting. Index k-1 holds order k.
struct OrderProfile {
  std::vector<std::size_t> branching;    // j_k, orders 1..k_max-1
  std::vector<std::size_t> total_nodes;  // branching + terminal, orders 1..k_max
  int k_max = 0;
  std::size_t j_max = 0;

  std::size_t j(int k) const {
    return k >= 1 && static_cast<std::size_t>(k) <= branching.size() ? branching[static_cast<std::size_t>(k - 1)] : 0;
  }
  std::size_t total(int k) const {
    return k >= 1 && static_cast<std::size_t>(k) <= total_nodes.size() ? total_nodes[static_cast<std::size_t>(k - 1)]
                                                                        : 0;
  }
};

inline OrderProfile order_profile(const NeuronTree& tree) {
  OrderProfile prof;
  const auto& nodes = tree.nodes();
  for (std::size_t i = 1; i < nodes.size(); ++i) prof.k_max = std::max(prof.k_max, nodes[i].order);
  prof.total_nodes.assign(static_cast<std::size_t>(prof.k_max), 0);
  prof.branching.assign(static_cast<std::size_t>(prof.k_max), 0);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const auto k = static_cast<std::size_t>(nodes[i].order - 1);
    ++prof.total_nodes[k];
    if (nodes[i].child_count() == 2) ++prof.branching[k];
  }
  while (!prof.branching.empty() && prof.branching.back() == 0) prof.branching.pop_back();
  for (auto jk : prof.branching) prof.j_max = std::max(prof.j_max, jk);
  return prof;
}

/// Terminal count of the subtree below each node (a terminal counts itself).
inline std::vector<std::size_t> terminal_counts(const NeuronTree& tree) {
  const auto& nodes = tree.nodes();
  std::vector<std::size_t> count(nodes.size(), 0);
  for (std::size_t i = nodes.size(); i-- > 1;) {
    if (nodes[i].child_count() == 0) count[i] = 1;
    count[static_cast<std::size_t>(nodes[i].parent)] += count[i];
  }
  return count;
}

struct SubtreePartition {
  NodeIndex node;
  std::size_t r;  // terminals below the first child
  std::size_t s;  // terminals below the second child
};

/// One (r, s) pair per branching node, in node-index order.
inline std::vector<SubtreePartition> subtree_counts(const NeuronTree& tree) {
  const auto count = terminal_counts(tree);
  std::vector<SubtreePartition> out;
  const auto& nodes = tree.nodes();
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.child_count() != 2) continue;
    out.push_back({static_cast<NodeIndex>(i), count[static_cast<std::size_t>(n.children[0])],
                   count[static_cast<std::size_t>(n.children[1])]});
  }
  return out;
}

struct NodeClassCounts {
  std::size_t b = 0;  // both children branch
  std::size_t m = 0;  // exactly one child branches
  std::size_t s = 0;  // both children terminate

  std::size_t total() const noexcept { return b + m + s; }
  friend bool operator==(const NodeClassCounts&, const NodeClassCounts&) = default;
};

inline NodeClassCounts classify_nodes(const NeuronTree& tree) {
  NodeClassCounts out;
  const auto& nodes = tree.nodes();
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.child_count() != 2) continue;
    const int branching_children = (nodes[static_cast<std::size_t>(n.children[0])].child_count() == 2) +
                                   (nodes[static_cast<std::size_t>(n.children[1])].child_count() == 2);
    if (branching_children == 2)
      ++out.b;
    else if (branching_children == 1)
      ++out.m;
    else
      ++out.s;
  }
  return out;
}

}  // namespace neurotopo
