#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "neurotopo/errors.hpp"

namespace neurotopo {

enum class TreeKind { axon, dendrite };

inline std::string_view to_string(TreeKind kind) { return kind == TreeKind::axon ? "axon" : "dendrite"; }

inline TreeKind tree_kind_from_string(std::string_view s) {
  if (s == "axon") return TreeKind::axon;
  if (s == "dendrite") return TreeKind::dendrite;
  throw Error("unknown tree kind '" + std::string(s) + "'");
}

using NodeIndex = std::int32_t;
inline constexpr NodeIndex kNoNode = -1;

struct TreeNode {
  NodeIndex parent = kNoNode;
  std::array<NodeIndex, 2> children{kNoNode, kNoNode};
  int order = 0;
  double edge_length = 0.0;  // from parent, um
  bool synthetic = false;    // inserted while splitting a multifurcation

  int child_count() const noexcept { return (children[0] != kNoNode) + (children[1] != kNoNode); }
};

/// Rooted binary tree. nodes[0] is the soma stub with a single child at
/// order 1; every other node has either 0 (terminal) or 2 children. Parents
/// always precede their children in `nodes`, so a reverse scan is a
/// post-order traversal.
class NeuronTree {
 public:
  NeuronTree() : NeuronTree(TreeKind::dendrite, true) {}
  NeuronTree(TreeKind kind, bool has_lengths) : kind_(kind), has_lengths_(has_lengths) { nodes_.emplace_back(); }

  TreeKind kind() const noexcept { return kind_; }
  void set_kind(TreeKind kind) noexcept { kind_ = kind; }
  bool has_lengths() const noexcept { return has_lengths_; }

  std::optional<std::uint64_t> seed;  // set for generated trees
  bool axon_tie = false;              // axon chosen by the tie-break rule

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& node(NodeIndex i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  std::size_t size() const noexcept { return nodes_.size(); }

  bool is_terminal(NodeIndex i) const { return i != 0 && node(i).child_count() == 0; }
  bool is_branching(NodeIndex i) const { return i != 0 && node(i).child_count() == 2; }

  /// Appends a child under `parent` and returns its index. Order is parent's + 1.
  NodeIndex add_child(NodeIndex parent, double edge_length = 0.0, bool synthetic = false) {
    auto& p = nodes_.at(static_cast<std::size_t>(parent));
    const int slot = p.children[0] == kNoNode ? 0 : 1;
    if (p.children[slot] != kNoNode || (parent == 0 && slot == 1)) {
      throw Error("node " + std::to_string(parent) + " already has its children");
    }
    const auto idx = static_cast<NodeIndex>(nodes_.size());
    p.children[slot] = idx;
    TreeNode child;
    child.parent = parent;
    child.order = p.order + 1;
    child.edge_length = edge_length;
    child.synthetic = synthetic;
    nodes_.push_back(child);
    return idx;
  }

  std::size_t branching_count() const noexcept {
    std::size_t n = 0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) n += nodes_[i].child_count() == 2;
    return n;
  }

  std::size_t terminal_count() const noexcept {
    std::size_t n = 0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) n += nodes_[i].child_count() == 0;
    return n;
  }

  /// Throws Error describing the first violated structural invariant.
  void validate() const;

  friend bool operator==(const NeuronTree& x, const NeuronTree& y) {
    if (x.kind_ != y.kind_ || x.has_lengths_ != y.has_lengths_ || x.seed != y.seed || x.axon_tie != y.axon_tie ||
        x.nodes_.size() != y.nodes_.size())
      return false;
    for (std::size_t i = 0; i < x.nodes_.size(); ++i) {
      const auto& a = x.nodes_[i];
      const auto& b = y.nodes_[i];
      if (a.parent != b.parent || a.children != b.children || a.order != b.order || a.synthetic != b.synthetic)
        return false;
      if (x.has_lengths_ && a.edge_length != b.edge_length) return false;
    }
    return true;
  }

 private:
  TreeKind kind_;
  bool has_lengths_;
  std::vector<TreeNode> nodes_;
};

inline void NeuronTree::validate() const {
  auto fail = [](const std::string& msg) { throw Error("invalid tree: " + msg); };
  if (nodes_.empty()) fail("no soma stub");
  const auto& root = nodes_[0];
  if (root.parent != kNoNode || root.order != 0) fail("soma stub must have no parent and order 0");
  if (root.child_count() != 1 || root.children[0] == kNoNode) fail("soma stub must have exactly one child");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    const auto idx = static_cast<NodeIndex>(i);
    if (n.parent < 0 || n.parent >= idx) fail("node " + std::to_string(i) + " must follow its parent");
    const auto& p = nodes_[static_cast<std::size_t>(n.parent)];
    if (p.children[0] != idx && p.children[1] != idx) fail("node " + std::to_string(i) + " not listed by its parent");
    if (n.order != p.order + 1) fail("node " + std::to_string(i) + " order is not parent order + 1");
    const int cc = n.child_count();
    if (cc == 1) fail("node " + std::to_string(i) + " has a single child");
    if (cc == 2 && n.children[0] > n.children[1]) fail("node " + std::to_string(i) + " children out of order");
    if (!(n.edge_length >= 0.0)) fail("node " + std::to_string(i) + " has a negative edge length");
  }
  if (branching_count() < 1) fail("tree has no branching node");
}

}  // namespace neurotopo
