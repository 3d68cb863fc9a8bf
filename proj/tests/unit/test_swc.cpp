#include <cmath>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "neurotopo/morphometry.hpp"
#include "neurotopo/swc.hpp"
#include "neurotopo/topology.hpp"
#include "neurotopo/tree_json.hpp"

using namespace neurotopo;

namespace {

const std::filesystem::path kFixtures = NEUROTOPO_FIXTURE_DIR;

std::size_t parse_error_line(const std::string& text) {
  try {
    parse_swc(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return static_cast<std::size_t>(-1);
}

}  // namespace

TEST(ParseSwc, MinimalTwoPointFile) {
  const auto f = parse_swc("1 1 0 0 0 1 -1\n2 3 10 0 0 1 1");
  ASSERT_EQ(f.points.size(), 2u);
  EXPECT_EQ(f.points[1].id, 2);
  EXPECT_EQ(f.points[1].parent_id, 1);
  EXPECT_DOUBLE_EQ(f.points[1].x, 10.0);
}

TEST(ParseSwc, SkipsCommentsBlankLinesAndCarriageReturns) {
  const auto f = parse_swc("# header\n\n  # indented comment\r\n1 1 0 0 0 1 -1\r\n\t2 3 1.5e1 0 0 1 1\r\n\n");
  ASSERT_EQ(f.points.size(), 2u);
  EXPECT_DOUBLE_EQ(f.points[1].x, 15.0);
}

TEST(ParseSwc, NonNumericFieldReportsLine) {
  EXPECT_EQ(parse_error_line("1 1 0 0 0 1 -1\n2 3 10 0 0 1 1\n3 3 a b c 1 1\n"), 3u);
}

TEST(ParseSwc, WrongFieldCountReportsLine) {
  EXPECT_EQ(parse_error_line("1 1 0 0 0 1 -1\n# c\n2 3 10 0 0 1\n"), 3u);
  EXPECT_EQ(parse_error_line("1 1 0 0 0 1 -1 9\n"), 1u);
}

TEST(ParseSwc, DanglingParent) {
  const std::string text = "1 1 0 0 0 1 -1\n2 3 0 0 0 1 1\n3 3 0 0 0 1 2\n4 3 0 0 0 1 3\n5 3 0 0 0 1 99\n";
  EXPECT_EQ(parse_error_line(text), 5u);
  try {
    parse_swc(text);
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("missing parent 99"), std::string::npos);
  }
}

TEST(ParseSwc, DuplicateId) { EXPECT_EQ(parse_error_line("1 1 0 0 0 1 -1\n2 3 0 0 0 1 1\n2 3 0 0 0 1 1\n"), 3u); }

TEST(ParseSwc, Cycle) {
  EXPECT_THROW(parse_swc("1 1 0 0 0 1 -1\n2 3 0 0 0 1 3\n3 3 0 0 0 1 2\n"), ParseError);
}

TEST(ParseSwc, RejectsBadIds) {
  EXPECT_EQ(parse_error_line("0 1 0 0 0 1 -1\n"), 1u);
  EXPECT_EQ(parse_error_line("1 1 0 0 0 1 -2\n"), 1u);
  EXPECT_EQ(parse_error_line("1 1 0 0 0 1 -1\n2 3 0 0 0 1 1.5\n"), 2u);
}

TEST(ParseSwc, NeedsARoot) { EXPECT_THROW(parse_swc("# nothing\n"), ParseError); }

TEST(Decompose, MinimalFixture) {
  const auto d = decompose(read_swc(kFixtures / "minimal.swc"));
  ASSERT_EQ(d.trees.size(), 1u);
  const auto& t = d.trees[0];
  EXPECT_EQ(t.kind(), TreeKind::axon);
  EXPECT_EQ(t.branching_count(), 1u);
  EXPECT_EQ(t.terminal_count(), 2u);
  EXPECT_DOUBLE_EQ(t.node(1).edge_length, 20.0);
  EXPECT_DOUBLE_EQ(t.node(2).edge_length, std::hypot(10.0, 5.0));
  EXPECT_EQ(t.node(1).order, 1);
  EXPECT_EQ(t.node(2).order, 2);
}

TEST(Decompose, StemsKeptDroppedAndAxonChosenBySize) {
  // stem branching counts {12, 3, 0}: a caterpillar of 12 nodes, one of 3, an unbranched stem
  std::string text = "1 1 0 0 0 5 -1\n";
  int id = 2;
  auto caterpillar = [&](int nodes, double dir) {
    int parent = 1;
    for (int i = 0; i < nodes; ++i) {
      const int spine = id++;
      text += std::to_string(spine) + " 3 " + std::to_string(dir * (i + 1)) + " 0 0 1 " + std::to_string(parent) + "\n";
      const int leaf = id++;
      text += std::to_string(leaf) + " 3 " + std::to_string(dir * (i + 1)) + " 1 0 1 " + std::to_string(spine) + "\n";
      parent = spine;
    }
    const int tip = id++;
    text += std::to_string(tip) + " 3 " + std::to_string(dir * (nodes + 1)) + " 0 0 1 " + std::to_string(parent) + "\n";
  };
  caterpillar(3, -1.0);
  caterpillar(12, 1.0);
  const int a = id++, b = id++;
  text += std::to_string(a) + " 3 0 0 5 1 1\n" + std::to_string(b) + " 3 0 0 10 1 " + std::to_string(a) + "\n";

  const auto d = decompose(parse_swc(text));
  ASSERT_EQ(d.trees.size(), 2u);
  EXPECT_EQ(d.dropped_stems, 1u);
  EXPECT_FALSE(d.axon_tie);
  EXPECT_EQ(d.trees[0].kind(), TreeKind::axon);
  EXPECT_EQ(d.trees[0].branching_count(), 12u);
  EXPECT_EQ(d.trees[1].kind(), TreeKind::dendrite);
  EXPECT_EQ(d.trees[1].branching_count(), 3u);
}

TEST(Decompose, TrifurcationBecomesLeftLeaningCascade) {
  const auto d = decompose(read_swc(kFixtures / "multifurcation.swc"));
  EXPECT_EQ(d.split_multifurcations, 1u);
  EXPECT_EQ(d.dropped_stems, 1u);
  ASSERT_EQ(d.trees.size(), 2u);
  const auto& axon = d.trees[0];
  EXPECT_EQ(axon.kind(), TreeKind::axon);
  EXPECT_EQ(axon.branching_count(), 2u);
  EXPECT_EQ(axon.terminal_count(), 3u);
  // node 1 is the trifurcation; it keeps A (first child in file order) and a synthetic node
  const auto& top = axon.node(1);
  const auto& a = axon.node(top.children[0]);
  const auto& s = axon.node(top.children[1]);
  EXPECT_EQ(a.child_count(), 0);
  EXPECT_DOUBLE_EQ(a.edge_length, std::hypot(5.0, 10.0));
  EXPECT_TRUE(s.synthetic);
  EXPECT_EQ(s.edge_length, 0.0);
  EXPECT_EQ(s.child_count(), 2);
  EXPECT_DOUBLE_EQ(axon.node(s.children[0]).edge_length, 10.0);  // B straight ahead
  EXPECT_DOUBLE_EQ(axon.node(s.children[1]).edge_length, std::hypot(5.0, 10.0));
  EXPECT_EQ(axon.node(s.children[1]).order, 3);
}

TEST(Decompose, SplittingPreservesTerminalsAndLength) {
  // a 5-way branch point splits into 4 binary nodes with the same tips and length
  std::string text = "1 1 0 0 0 5 -1\n2 3 10 0 0 1 1\n";
  for (int i = 0; i < 5; ++i) text += std::to_string(3 + i) + " 3 10 " + std::to_string(10 * (i - 2)) + " 0 1 2\n";
  const auto swc = parse_swc(text);
  double raw = 0.0;
  for (const auto& p : swc.points) {
    if (p.parent_id == -1) continue;
    const auto& q = swc.points[static_cast<std::size_t>(p.parent_id - 1)];
    raw += std::hypot(p.x - q.x, p.y - q.y, p.z - q.z);
  }
  const auto d = decompose(swc);
  ASSERT_EQ(d.trees.size(), 1u);
  EXPECT_EQ(d.trees[0].terminal_count(), 5u);
  EXPECT_EQ(d.trees[0].branching_count(), 4u);
  EXPECT_DOUBLE_EQ(*total_length(d.trees[0]), raw);
  EXPECT_NO_THROW(d.trees[0].validate());
}

TEST(Decompose, UnbranchedNeuriteGivesNoTrees) {
  const auto d = decompose(read_swc(kFixtures / "dropped_stem.swc"));
  EXPECT_TRUE(d.trees.empty());
  EXPECT_EQ(d.dropped_stems, 1u);
}

TEST(Decompose, SomaPointsCollapse) {
  const auto d = decompose(read_swc(kFixtures / "soma_cluster.swc"));
  ASSERT_EQ(d.trees.size(), 2u);
  EXPECT_EQ(d.trees[0].branching_count(), 2u);  // stem 7: a bifurcation then another
  EXPECT_EQ(d.trees[1].branching_count(), 1u);
  // first edge starts at the soma point the stem hangs from, not at the root
  EXPECT_DOUBLE_EQ(d.trees[1].node(1).edge_length, 10.0);
  EXPECT_DOUBLE_EQ(d.trees[0].node(1).edge_length, 20.0);
  EXPECT_EQ(d.trees[0].node(1).order, 1);
}

TEST(Decompose, AxonTieGoesToLowestStemId) {
  const std::string text =
      "1 1 0 0 0 5 -1\n"
      "2 3 1 0 0 1 1\n3 3 2 1 0 1 2\n4 3 2 -1 0 1 2\n"
      "5 3 -1 0 0 1 1\n6 3 -2 1 0 1 5\n7 3 -2 -1 0 1 5\n";
  const auto d = decompose(parse_swc(text));
  ASSERT_EQ(d.trees.size(), 2u);
  EXPECT_TRUE(d.axon_tie);
  EXPECT_TRUE(d.trees[0].axon_tie);
  EXPECT_DOUBLE_EQ(d.trees[0].node(1).edge_length, 1.0);  // stem 2
  EXPECT_EQ(d.trees[0].kind(), TreeKind::axon);
}

TEST(Decompose, MultipleRoots) {
  const std::string text =
      "1 1 0 0 0 5 -1\n2 3 1 0 0 1 1\n3 3 2 1 0 1 2\n4 3 2 -1 0 1 2\n"
      "10 1 50 0 0 5 -1\n11 3 51 0 0 1 10\n12 3 52 1 0 1 11\n13 3 52 -1 0 1 11\n14 3 53 1 0 1 12\n15 3 53 2 0 1 12\n";
  EXPECT_THROW(decompose(parse_swc(text)), Error);
  const auto d = decompose(parse_swc(text), {.allow_multiple_roots = true});
  EXPECT_EQ(d.soma_id, 10);
  ASSERT_EQ(d.trees.size(), 1u);
  EXPECT_EQ(d.trees[0].branching_count(), 2u);
}

TEST(Decompose, InvariantsOnEveryTree) {
  for (const char* name : {"minimal.swc", "multifurcation.swc", "soma_cluster.swc"}) {
    for (const auto& t : decompose(read_swc(kFixtures / name)).trees) {
      EXPECT_NO_THROW(t.validate()) << name;
      EXPECT_EQ(t.terminal_count(), t.branching_count() + 1) << name;
      double sum = 0.0;
      for (const auto& n : t.nodes()) {
        EXPECT_GE(n.edge_length, 0.0);
        if (n.edge_length == 0.0 && &n != &t.nodes().front()) { EXPECT_TRUE(n.synthetic); }
        sum += n.edge_length;
      }
      EXPECT_EQ(sum, *total_length(t));
    }
  }
}

TEST(TreeJson, RoundTripIsExact) {
  TreeDocument doc;
  doc.source = "multifurcation.swc";
  auto d = decompose(read_swc(kFixtures / "multifurcation.swc"));
  doc.trees = d.trees;
  doc.dropped_stems = d.dropped_stems;
  const auto text = dump_document(doc);
  const auto back = document_from_json(nlohmann::json::parse(text));
  ASSERT_EQ(back.trees.size(), doc.trees.size());
  for (std::size_t i = 0; i < doc.trees.size(); ++i) EXPECT_TRUE(back.trees[i] == doc.trees[i]);
  EXPECT_EQ(dump_document(back), text);
}

TEST(TreeJson, RejectsInconsistentDocuments) {
  auto j = nlohmann::json::parse(R"({"schema_version":1,"source":"x","trees":[{"kind":"axon","nodes":[
    {"id":0,"parent":-1,"order":0,"edge_length_um":0},
    {"id":1,"parent":0,"order":1,"edge_length_um":1},
    {"id":2,"parent":1,"order":3,"edge_length_um":1},
    {"id":3,"parent":1,"order":2,"edge_length_um":1}]}]})");
  EXPECT_THROW(document_from_json(j), Error);
  j["trees"][0]["nodes"][2]["order"] = 2;
  EXPECT_NO_THROW(document_from_json(j));
  j["trees"][0]["nodes"][3]["parent"] = 2;
  j["trees"][0]["nodes"][3]["order"] = 3;
  EXPECT_THROW(document_from_json(j), Error);  // node 2 would have a single child
  j["schema_version"] = 2;
  EXPECT_THROW(document_from_json(j), Error);
}
