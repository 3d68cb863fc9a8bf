#include <gtest/gtest.h>

#include "neurotopo/topology.hpp"
#include "support/shapes.hpp"

using namespace neurotopo;

TEST(Topology, SingleBifurcation) {
  const auto t = oracle::to_tree("(xx)");
  const auto p = order_profile(t);
  EXPECT_EQ(p.k_max, 2);
  EXPECT_EQ(p.j_max, 1u);
  EXPECT_EQ(p.j(1), 1u);
  EXPECT_EQ(p.total(2), 2u);
  EXPECT_EQ(classify_nodes(t), (NodeClassCounts{0, 0, 1}));
  const auto parts = subtree_counts(t);
  ASSERT_EQ(parts.size(), 1u);
  EXPECT_EQ(parts[0].r, 1u);
  EXPECT_EQ(parts[0].s, 1u);
}

TEST(Topology, ThreeNodeCaterpillar) {
  const auto t = oracle::to_tree("(((xx)x)x)");
  const auto p = order_profile(t);
  EXPECT_EQ(p.k_max, 4);
  EXPECT_EQ(p.j_max, 1u);
  EXPECT_EQ(classify_nodes(t), (NodeClassCounts{0, 2, 1}));
  EXPECT_EQ(t.terminal_count(), 4u);
  const auto parts = subtree_counts(t);
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[0].r, 3u);
  EXPECT_EQ(parts[0].s, 1u);
  EXPECT_EQ(parts[1].r, 2u);
  EXPECT_EQ(parts[1].s, 1u);
  EXPECT_EQ(parts[2].r, 1u);
  EXPECT_EQ(parts[2].s, 1u);
}

TEST(Topology, PerfectDepthThree) {
  const auto t = oracle::to_tree("(((xx)(xx))((xx)(xx)))");
  const auto p = order_profile(t);
  EXPECT_EQ(p.k_max, 4);
  EXPECT_EQ(p.j_max, 4u);
  EXPECT_EQ(p.branching, (std::vector<std::size_t>{1, 2, 4}));
  EXPECT_EQ(p.total_nodes, (std::vector<std::size_t>{1, 2, 4, 8}));
  EXPECT_EQ(classify_nodes(t), (NodeClassCounts{3, 0, 4}));
}

TEST(Topology, AllShapesWithFiveNodes) {
  EXPECT_EQ(oracle::shapes_with(4).size(), 14u);
  const auto shapes = oracle::shapes_with(5);
  ASSERT_EQ(shapes.size(), 42u);
  for (const auto& s : shapes) {
    const auto t = oracle::to_tree(s);
    const auto c = classify_nodes(t);
    EXPECT_EQ(c.total(), 5u) << s;
    const auto root = subtree_counts(t).front();
    EXPECT_EQ(root.r + root.s, 6u) << s;
    EXPECT_GE(order_profile(t).k_max, 4) << s;
    EXPECT_LE(order_profile(t).k_max, 6) << s;
  }
}

TEST(Topology, InvariantsAgainstOracle) {
  for (int n = 1; n <= 8; ++n) {
    for (const auto& s : oracle::shapes_with(n)) {
      const auto t = oracle::to_tree(s);
      ASSERT_NO_THROW(t.validate()) << s;
      const auto p = order_profile(t);
      const auto c = classify_nodes(t);
      const auto e = oracle::brute_force(s);
      EXPECT_EQ(c.b, e.b) << s;
      EXPECT_EQ(c.m, e.m) << s;
      EXPECT_EQ(c.s, e.s) << s;
      EXPECT_EQ(p.k_max, e.k_max) << s;
      EXPECT_EQ(p.j_max, e.j_max) << s;
      EXPECT_EQ(c.s, c.b + 1) << s;  // S = B + 1 in every binary tree
      EXPECT_EQ(t.terminal_count(), c.total() + 1) << s;
      std::size_t sum_j = 0;
      for (auto j : p.branching) sum_j += j;
      EXPECT_EQ(sum_j, c.total()) << s;
      for (int k = 2; k <= p.k_max; ++k) EXPECT_EQ(p.total(k), 2 * p.j(k - 1)) << s;
      const auto count = terminal_counts(t);
      EXPECT_EQ(count[0], c.total() + 1) << s;
    }
  }
}
