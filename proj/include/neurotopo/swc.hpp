#pragma once

// SWC reconstruction files and their decomposition into one axon and
// several dendrites, each a canonical binary tree.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "neurotopo/errors.hpp"
#include "neurotopo/tree.hpp"

namespace neurotopo {

struct SwcPoint {
  std::int64_t id = 0;
  int structure_code = 0;
  double x = 0.0, y = 0.0, z = 0.0;
  double radius = 0.0;
  std::int64_t parent_id = -1;
  std::size_t line = 0;  // source line, for diagnostics
};

struct SwcFile {
  std::vector<SwcPoint> points;
  std::string source_path;
};

namespace detail {

template <typename T>
bool parse_number(std::string_view field, T& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace detail

/// Parses SWC text. Checks field syntax, id uniqueness, parent references
/// and acyclicity; structure codes are carried along untouched.
inline SwcFile parse_swc(std::string_view text, std::string source_path = {}) {
  SwcFile file;
  file.source_path = std::move(source_path);
  std::unordered_map<std::int64_t, std::size_t> index;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, eol - pos);
    ++line_no;
    pos = eol + 1;

    const auto fields = detail::split_fields(line);
    if (fields.empty() || fields.front().front() == '#') {
      if (eol == text.size()) break;
      continue;
    }
    if (fields.size() != 7) {
      throw ParseError("expected 7 fields, found " + std::to_string(fields.size()), line_no);
    }
    SwcPoint p;
    p.line = line_no;
    const bool ok = detail::parse_number(fields[0], p.id) && detail::parse_number(fields[1], p.structure_code) &&
                    detail::parse_number(fields[2], p.x) && detail::parse_number(fields[3], p.y) &&
                    detail::parse_number(fields[4], p.z) && detail::parse_number(fields[5], p.radius) &&
                    detail::parse_number(fields[6], p.parent_id);
    if (!ok || !std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) || !std::isfinite(p.radius)) {
      throw ParseError("non-numeric field", line_no);
    }
    if (p.id <= 0) throw ParseError("point id must be positive", line_no);
    if (p.parent_id < -1 || p.parent_id == 0) throw ParseError("parent id must be -1 or a point id", line_no);
    if (!index.emplace(p.id, file.points.size()).second) {
      throw ParseError("duplicate point id " + std::to_string(p.id), line_no);
    }
    file.points.push_back(p);
    if (eol == text.size()) break;
  }

  for (const auto& p : file.points) {
    if (p.parent_id != -1 && !index.contains(p.parent_id)) {
      throw ParseError("point " + std::to_string(p.id) + " references missing parent " + std::to_string(p.parent_id),
                       p.line);
    }
  }

  // 0 = unvisited, 1 = on the current parent chain, 2 = reaches a root
  std::vector<std::uint8_t> state(file.points.size(), 0);
  std::vector<std::size_t> chain;
  for (std::size_t start = 0; start < file.points.size(); ++start) {
    chain.clear();
    std::size_t cur = start;
    while (state[cur] == 0) {
      state[cur] = 1;
      chain.push_back(cur);
      if (file.points[cur].parent_id == -1) break;
      cur = index.at(file.points[cur].parent_id);
    }
    if (state[cur] == 1 && file.points[cur].parent_id != -1) {
      throw ParseError("cycle through point " + std::to_string(file.points[cur].id), file.points[cur].line);
    }
    for (auto c : chain) state[c] = 2;
  }

  bool has_root = std::ranges::any_of(file.points, [](const SwcPoint& p) { return p.parent_id == -1; });
  if (!has_root) throw ParseError("no root point (parent id -1)", 0);
  return file;
}

inline SwcFile read_swc(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_swc(ss.str(), path.string());
}

struct DecomposeOptions {
  /// With several roots, keep the largest connected component instead of failing.
  bool allow_multiple_roots = false;
};

struct Decomposition {
  std::vector<NeuronTree> trees;  // axon first, then dendrites in stem order
  std::size_t dropped_stems = 0;  // stems without a branching point
  std::size_t split_multifurcations = 0;
  bool axon_tie = false;
  std::int64_t soma_id = 0;

  std::size_t dendrite_count() const {
    return static_cast<std::size_t>(
        std::ranges::count_if(trees, [](const NeuronTree& t) { return t.kind() == TreeKind::dendrite; }));
  }
};

/// Splits a neuron at its soma into stem trees. Stems without a branching
/// point are dropped; the stem with most branching nodes becomes the axon
/// (ties go to the lowest stem point id and set `axon_tie`). Nodes with more
/// than two children become left-leaning cascades of bifurcations joined by
/// zero-length synthetic edges, children taken in file order.
inline Decomposition decompose(const SwcFile& swc, const DecomposeOptions& options = {}) {
  const auto& pts = swc.points;
  const std::size_t n = pts.size();
  std::unordered_map<std::int64_t, std::size_t> index;
  index.reserve(n);
  for (std::size_t i = 0; i < n; ++i) index.emplace(pts[i].id, i);

  std::vector<std::size_t> parent(n, n);
  std::vector<std::vector<std::size_t>> children(n);
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < n; ++i) {
    if (pts[i].parent_id == -1) {
      roots.push_back(i);
    } else {
      parent[i] = index.at(pts[i].parent_id);
      children[parent[i]].push_back(i);
    }
  }
  if (roots.empty()) throw Error("no root point");

  auto component_size = [&](std::size_t root) {
    std::size_t count = 0;
    std::vector<std::size_t> stack{root};
    while (!stack.empty()) {
      const auto cur = stack.back();
      stack.pop_back();
      ++count;
      for (auto c : children[cur]) stack.push_back(c);
    }
    return count;
  };

  std::size_t soma = roots.front();
  if (roots.size() > 1) {
    if (!options.allow_multiple_roots) {
      throw Error(swc.source_path + ": " + std::to_string(roots.size()) +
                  " root points; pass --largest-component to keep the largest connected component");
    }
    std::size_t best = 0;
    for (auto r : roots) {
      const auto size = component_size(r);
      if (size > best) {
        best = size;
        soma = r;
      }
    }
  }

  // Soma-coded points reachable from the root through soma-coded points form one vertex.
  std::vector<bool> in_soma(n, false);
  std::vector<std::size_t> soma_points{soma};
  in_soma[soma] = true;
  for (std::size_t i = 0; i < soma_points.size(); ++i) {
    for (auto c : children[soma_points[i]]) {
      if (pts[c].structure_code == 1 && !in_soma[c]) {
        in_soma[c] = true;
        soma_points.push_back(c);
      }
    }
  }
  std::vector<std::size_t> stems;
  for (auto s : soma_points) {
    for (auto c : children[s]) {
      if (!in_soma[c]) stems.push_back(c);
    }
  }
  std::ranges::sort(stems);  // file order

  auto distance = [&](std::size_t a, std::size_t b) {
    return std::hypot(pts[a].x - pts[b].x, pts[a].y - pts[b].y, pts[a].z - pts[b].z);
  };

  Decomposition out;
  out.soma_id = pts[soma].id;

  struct Segment {
    NodeIndex tree_parent;
    std::size_t from;   // traced point the edge starts at
    std::size_t start;  // first traced point of the edge
  };
  struct Cascade {
    NodeIndex tree_parent;
    std::size_t at;  // traced branch point
    std::size_t first_child;  // offset into children[at]
  };
  using Work = std::variant<Segment, Cascade>;

  struct Stem {
    NeuronTree tree;
    std::size_t branching = 0;
    std::int64_t stem_id = 0;
  };
  std::vector<Stem> kept;

  for (auto stem : stems) {
    NeuronTree tree(TreeKind::dendrite, true);
    std::vector<Work> work{Segment{0, parent[stem], stem}};

    // Places children[at][first..] under tree node `holder`: the first
    // becomes a direct child, the rest go under a synthetic node unless
    // only one remains.
    auto attach = [&](NodeIndex holder, std::size_t at, std::size_t first) {
      const auto& kids = children[at];
      if (kids.size() - first == 2) {
        work.emplace_back(Segment{holder, at, kids[first + 1]});
      } else {
        work.emplace_back(Cascade{holder, at, first + 1});
      }
      work.emplace_back(Segment{holder, at, kids[first]});
    };

    while (!work.empty()) {
      const Work item = work.back();
      work.pop_back();
      if (const auto* seg = std::get_if<Segment>(&item)) {
        double length = distance(seg->from, seg->start);
        std::size_t cur = seg->start;
        while (children[cur].size() == 1) {
          length += distance(cur, children[cur].front());
          cur = children[cur].front();
        }
        const NodeIndex node = tree.add_child(seg->tree_parent, length);
        if (children[cur].size() > 2) ++out.split_multifurcations;
        if (children[cur].size() >= 2) attach(node, cur, 0);
      } else {
        const auto& cas = std::get<Cascade>(item);
        const NodeIndex node = tree.add_child(cas.tree_parent, 0.0, true);
        attach(node, cas.at, cas.first_child);
      }
    }

    const auto branching = tree.branching_count();
    if (branching == 0) {
      ++out.dropped_stems;
      continue;
    }
    kept.push_back(Stem{std::move(tree), branching, pts[stem].id});
  }

  if (!kept.empty()) {
    std::size_t axon = 0;
    for (std::size_t i = 1; i < kept.size(); ++i) {
      const auto& a = kept[axon];
      const auto& b = kept[i];
      if (b.branching > a.branching || (b.branching == a.branching && b.stem_id < a.stem_id)) axon = i;
    }
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (i != axon && kept[i].branching == kept[axon].branching) out.axon_tie = true;
    }
    kept[axon].tree.set_kind(TreeKind::axon);
    kept[axon].tree.axon_tie = out.axon_tie;
    out.trees.push_back(std::move(kept[axon].tree));
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (i != axon) out.trees.push_back(std::move(kept[i].tree));
    }
  }
  return out;
}

}  // namespace neurotopo
