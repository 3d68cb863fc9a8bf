#pragma once

// Canonical tree document:
//
//   { "schema_version": 1, "source": "...", "dropped_stems": 0,
//     "trees": [ { "kind": "axon", "axon_tie": false, "seed": null,
//                  "nodes": [ {"id":0, "parent":-1, "order":0,
//                              "edge_length_um":0.0, "synthetic":false}, ... ] } ] }
//
// edge_length_um is null on every node of a tree without geometry.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "neurotopo/errors.hpp"
#include "neurotopo/tree.hpp"

namespace neurotopo {

inline constexpr int kSchemaVersion = 1;

struct TreeDocument {
  std::string source;
  std::size_t dropped_stems = 0;
  std::vector<NeuronTree> trees;
};

inline nlohmann::ordered_json tree_to_json(const NeuronTree& tree) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(tree.kind());
  j["axon_tie"] = tree.axon_tie;
  j["seed"] = tree.seed ? nlohmann::ordered_json(*tree.seed) : nlohmann::ordered_json(nullptr);
  auto nodes = nlohmann::ordered_json::array();
  const auto& ns = tree.nodes();
  for (std::size_t i = 0; i < ns.size(); ++i) {
    nlohmann::ordered_json n;
    n["id"] = i;
    n["parent"] = ns[i].parent;
    n["order"] = ns[i].order;
    n["edge_length_um"] = tree.has_lengths() ? nlohmann::ordered_json(ns[i].edge_length) : nlohmann::ordered_json(nullptr);
    n["synthetic"] = ns[i].synthetic;
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);
  return j;
}

inline NeuronTree tree_from_json(const nlohmann::json& j) {
  try {
    const auto& nodes = j.at("nodes");
    if (!nodes.is_array() || nodes.empty()) throw Error("tree has no nodes");
    const bool has_lengths = !nodes.front().at("edge_length_um").is_null();
    NeuronTree tree(tree_kind_from_string(j.at("kind").get<std::string>()), has_lengths);
    tree.axon_tie = j.value("axon_tie", false);
    if (j.contains("seed") && !j["seed"].is_null()) tree.seed = j["seed"].get<std::uint64_t>();
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      const auto& n = nodes[i];
      if (n.at("id").get<std::size_t>() != i) throw Error("node ids must be 0..n-1 in order");
      if (n.at("edge_length_um").is_null() == has_lengths) throw Error("edge lengths must be all present or all null");
      const double len = has_lengths ? n["edge_length_um"].get<double>() : 0.0;
      const auto parent = n.at("parent").get<NodeIndex>();
      if (parent < 0 || static_cast<std::size_t>(parent) >= i) throw Error("node " + std::to_string(i) + " must follow its parent");
      const auto idx = tree.add_child(parent, len, n.value("synthetic", false));
      if (tree.node(idx).order != n.at("order").get<int>()) throw Error("node " + std::to_string(i) + " order mismatch");
    }
    if (nodes.front().at("parent").get<int>() != -1) throw Error("node 0 must be the soma stub");
    tree.validate();
    return tree;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed tree json: ") + e.what());
  }
}

inline nlohmann::ordered_json document_to_json(const TreeDocument& doc) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["source"] = doc.source;
  j["dropped_stems"] = doc.dropped_stems;
  auto trees = nlohmann::ordered_json::array();
  for (const auto& t : doc.trees) trees.push_back(tree_to_json(t));
  j["trees"] = std::move(trees);
  return j;
}

inline TreeDocument document_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema_version").get<int>() != kSchemaVersion) throw Error("unsupported schema_version");
    TreeDocument doc;
    doc.source = j.at("source").get<std::string>();
    doc.dropped_stems = j.value("dropped_stems", std::size_t{0});
    for (const auto& t : j.at("trees")) doc.trees.push_back(tree_from_json(t));
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed tree document: ") + e.what());
  }
}

inline std::string dump_document(const TreeDocument& doc) { return document_to_json(doc).dump(1) + "\n"; }

inline TreeDocument read_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return document_from_json(j);
}

inline void write_document(const std::filesystem::path& path, const TreeDocument& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << dump_document(doc);
}

}  // namespace neurotopo
