#pragma once

// Plain CSV tables with a header row. Numbers are written in shortest
// round-trip form; an empty cell means "undefined".

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "neurotopo/errors.hpp"
#include "neurotopo/morphometry.hpp"
#include "neurotopo/topology.hpp"

namespace neurotopo {

inline std::string format_number(double v) {
  if (!std::isfinite(v)) return {};
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string format_number(std::optional<double> v) { return v ? format_number(*v) : std::string{}; }

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class CsvTable {
 public:
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error("csv has no column '" + std::string(name) + "'");
  }

  std::string write() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(cells[i]);
      }
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }

  static CsvTable parse(std::string_view text) {
    CsvTable t;
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false, any = false;
    auto end_row = [&] {
      row.push_back(std::move(cell));
      cell.clear();
      if (t.header.empty())
        t.header = std::move(row);
      else if (row.size() != t.header.size())
        throw Error("csv row " + std::to_string(t.rows.size() + 2) + " has " + std::to_string(row.size()) +
                    " cells, expected " + std::to_string(t.header.size()));
      else
        t.rows.push_back(std::move(row));
      row.clear();
      any = false;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
      const char c = text[i];
      if (quoted) {
        if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cell += c;
        }
        continue;
      }
      if (c == '"') {
        quoted = true;
        any = true;
      } else if (c == ',') {
        row.push_back(std::move(cell));
        cell.clear();
        any = true;
      } else if (c == '\n') {
        end_row();
      } else if (c != '\r') {
        cell += c;
        any = true;
      }
    }
    if (any || !cell.empty()) end_row();
    return t;
  }

  static CsvTable read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
      return parse(ss.str());
    } catch (const Error& e) {
      throw Error(path.string() + ": " + e.what());
    }
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << write();
  }
};

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error("bad number '" + std::string(s) + "'");
  return v;
}

inline std::optional<double> parse_optional(std::string_view s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

inline std::size_t parse_count(std::string_view s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error("bad count '" + std::string(s) + "'");
  return v;
}

enum class Origin { real, virtual_ };

inline std::string_view to_string(Origin o) { return o == Origin::real ? "real" : "virtual"; }

inline Origin origin_from_string(std::string_view s) {
  if (s == "real") return Origin::real;
  if (s == "virtual") return Origin::virtual_;
  throw Error("unknown origin '" + std::string(s) + "'");
}

/// One metrics row: the tree's identity plus its morphometrics.
struct MetricsRecord {
  std::string source;
  std::size_t tree_index = 0;
  Origin origin = Origin::real;
  TreeMetrics metrics;
};

inline const std::vector<std::string>& metrics_header() {
  static const std::vector<std::string> h{"source", "tree_index", "kind",   "origin", "N",   "k_max",
                                          "j_max",  "b_frac",     "m_frac", "s_frac", "A",   "E_p",
                                          "L",      "eligible_A", "eligible_Ep"};
  return h;
}

inline CsvTable metrics_table(const std::vector<MetricsRecord>& records) {
  CsvTable t;
  t.header = metrics_header();
  for (const auto& r : records) {
    const auto& m = r.metrics;
    t.rows.push_back({r.source, std::to_string(r.tree_index), std::string(to_string(m.kind)),
                      std::string(to_string(r.origin)), std::to_string(m.n), std::to_string(m.k_max),
                      std::to_string(m.j_max), format_number(m.b_frac), format_number(m.m_frac),
                      format_number(m.s_frac), format_number(m.asymmetry), format_number(m.excess_asymmetry),
                      format_number(m.total_length), std::to_string(m.eligible_a), std::to_string(m.eligible_ep)});
  }
  return t;
}

inline std::vector<MetricsRecord> metrics_from_table(const CsvTable& t) {
  std::vector<std::size_t> col;
  for (const auto& name : metrics_header()) col.push_back(t.column(name));
  std::vector<MetricsRecord> out;
  for (const auto& row : t.rows) {
    MetricsRecord r;
    r.source = row[col[0]];
    r.tree_index = parse_count(row[col[1]]);
    r.metrics.kind = tree_kind_from_string(row[col[2]]);
    r.origin = origin_from_string(row[col[3]]);
    r.metrics.n = parse_count(row[col[4]]);
    r.metrics.k_max = static_cast<int>(parse_count(row[col[5]]));
    r.metrics.j_max = parse_count(row[col[6]]);
    r.metrics.b_frac = parse_double(row[col[7]]);
    r.metrics.m_frac = parse_double(row[col[8]]);
    r.metrics.s_frac = parse_double(row[col[9]]);
    r.metrics.asymmetry = parse_optional(row[col[10]]);
    r.metrics.excess_asymmetry = parse_optional(row[col[11]]);
    r.metrics.total_length = parse_optional(row[col[12]]);
    r.metrics.eligible_a = parse_count(row[col[13]]);
    r.metrics.eligible_ep = parse_count(row[col[14]]);
    out.push_back(std::move(r));
  }
  return out;
}

struct ProfileRecord {
  std::string source;
  std::size_t tree_index = 0;
  TreeKind kind = TreeKind::dendrite;
  Origin origin = Origin::real;
  OrderProfile profile;
};

/// Long format: one row per (tree, order) with j_k and total nodes.
inline CsvTable profiles_table(const std::vector<ProfileRecord>& records) {
  CsvTable t;
  t.header = {"source", "tree_index", "kind", "origin", "order", "j_k", "total_nodes_k"};
  for (const auto& r : records) {
    for (int k = 1; k <= r.profile.k_max; ++k) {
      t.rows.push_back({r.source, std::to_string(r.tree_index), std::string(to_string(r.kind)),
                        std::string(to_string(r.origin)), std::to_string(k), std::to_string(r.profile.j(k)),
                        std::to_string(r.profile.total(k))});
    }
  }
  return t;
}

inline std::vector<ProfileRecord> profiles_from_table(const CsvTable& t) {
  const std::size_t c_src = t.column("source"), c_idx = t.column("tree_index"), c_kind = t.column("kind"),
                    c_origin = t.column("origin"), c_order = t.column("order"), c_j = t.column("j_k"),
                    c_total = t.column("total_nodes_k");
  std::vector<ProfileRecord> out;
  std::map<std::pair<std::string, std::size_t>, std::size_t> slot;
  for (const auto& row : t.rows) {
    const auto key = std::make_pair(row[c_src], parse_count(row[c_idx]));
    auto [it, fresh] = slot.emplace(key, out.size());
    if (fresh) {
      ProfileRecord r;
      r.source = key.first;
      r.tree_index = key.second;
      r.kind = tree_kind_from_string(row[c_kind]);
      r.origin = origin_from_string(row[c_origin]);
      out.push_back(std::move(r));
    }
    auto& prof = out[it->second].profile;
    const auto k = static_cast<int>(parse_count(row[c_order]));
    if (k != prof.k_max + 1) throw Error("profile rows for " + key.first + " must list orders 1, 2, ... in sequence");
    prof.k_max = k;
    prof.total_nodes.push_back(parse_count(row[c_total]));
    prof.branching.push_back(parse_count(row[c_j]));
  }
  for (auto& r : out) {
    auto& p = r.profile;
    while (!p.branching.empty() && p.branching.back() == 0) p.branching.pop_back();
    for (auto jk : p.branching) p.j_max = std::max(p.j_max, jk);
  }
  return out;
}

}  // namespace neurotopo
