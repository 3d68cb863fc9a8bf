#pragma once

// Test-only oracle. Binary tree shapes are strings: "x" is a terminal,
// "(LR)" a branching node. Metrics are recomputed here from explicit
// terminal-id sets, without touching the library's traversal code.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "neurotopo/tree.hpp"

namespace oracle {

inline std::vector<std::string> shapes_with(int internal) {
  static std::map<int, std::vector<std::string>> memo;
  if (auto it = memo.find(internal); it != memo.end()) return it->second;
  std::vector<std::string> out;
  if (internal == 0) {
    out.push_back("x");
  } else {
    for (int left = 0; left < internal; ++left) {
      for (const auto& l : shapes_with(left))
        for (const auto& r : shapes_with(internal - 1 - left)) out.push_back("(" + l + r + ")");
    }
  }
  memo[internal] = out;
  return out;
}

struct Node {
  std::unique_ptr<Node> left, right;
  std::set<int> terminals;
  int depth = 0;
  bool branching() const { return left != nullptr; }
};

inline std::unique_ptr<Node> parse(const std::string& s, std::size_t& pos, int depth, int& next_terminal) {
  auto n = std::make_unique<Node>();
  n->depth = depth;
  if (s[pos] == 'x') {
    ++pos;
    n->terminals.insert(next_terminal++);
    return n;
  }
  ++pos;  // '('
  n->left = parse(s, pos, depth + 1, next_terminal);
  n->right = parse(s, pos, depth + 1, next_terminal);
  ++pos;  // ')'
  n->terminals = n->left->terminals;
  n->terminals.insert(n->right->terminals.begin(), n->right->terminals.end());
  return n;
}

inline std::unique_ptr<Node> parse(const std::string& s) {
  std::size_t pos = 0;
  int next = 0;
  return parse(s, pos, 1, next);
}

inline void to_tree(const std::string& s, std::size_t& pos, neurotopo::NeuronTree& tree, neurotopo::NodeIndex self) {
  if (s[pos] == 'x') {
    ++pos;
    return;
  }
  ++pos;
  const auto l = tree.add_child(self, 1.0);
  const auto r = tree.add_child(self, 1.0);
  to_tree(s, pos, tree, l);
  to_tree(s, pos, tree, r);
  ++pos;
}

inline neurotopo::NeuronTree to_tree(const std::string& s) {
  neurotopo::NeuronTree tree(neurotopo::TreeKind::dendrite, true);
  const auto first = tree.add_child(0, 1.0);
  std::size_t pos = 0;
  to_tree(s, pos, tree, first);
  return tree;
}

struct Expected {
  std::size_t n = 0;
  int k_max = 0;
  std::size_t j_max = 0;
  std::size_t b = 0, m = 0, s = 0;
  std::optional<double> a;
  std::optional<double> ep;
};

inline double ap(double r, double s) { return std::abs(r - s) / (r + s - 2.0); }

inline Expected brute_force(const std::string& shape) {
  auto root = parse(shape);
  Expected e;
  std::map<int, std::size_t> per_depth;
  double a_sum = 0.0, ep_sum = 0.0;
  int a_n = 0, ep_n = 0;
  std::vector<const Node*> all{root.get()};
  for (std::size_t i = 0; i < all.size(); ++i) {
    const Node* n = all[i];
    e.k_max = std::max(e.k_max, n->depth);
    if (!n->branching()) continue;
    all.push_back(n->left.get());
    all.push_back(n->right.get());
    ++e.n;
    ++per_depth[n->depth];
    const bool lb = n->left->branching(), rb = n->right->branching();
    if (lb && rb) ++e.b;
    else if (lb || rb) ++e.m;
    else ++e.s;
    const double r = static_cast<double>(n->left->terminals.size());
    const double s = static_cast<double>(n->right->terminals.size());
    if (!(r == 1 && s == 1)) {
      a_sum += ap(r, s);
      ++a_n;
    }
    if (lb && rb) {
      // all ways to split the four granddaughter terminal sets into two pairs
      const std::set<int>* g[4] = {&n->left->left->terminals, &n->left->right->terminals,
                                   &n->right->left->terminals, &n->right->right->terminals};
      auto size_of = [&](int i, int j) {
        std::set<int> u = *g[i];
        u.insert(g[j]->begin(), g[j]->end());
        return static_cast<double>(u.size());
      };
      const double observed = ap(size_of(0, 1), size_of(2, 3));
      const double shuffled = (ap(size_of(0, 1), size_of(2, 3)) + ap(size_of(0, 2), size_of(1, 3)) +
                               ap(size_of(0, 3), size_of(1, 2))) / 3.0;
      ep_sum += observed - shuffled;
      ++ep_n;
    }
  }
  for (const auto& [d, c] : per_depth) e.j_max = std::max(e.j_max, c);
  if (a_n) e.a = a_sum / a_n;
  if (ep_n) e.ep = ep_sum / ep_n;
  return e;
}

}  // namespace oracle
