#pragma once

// Command implementations behind the `neurotopo` CLI. Each command reads
// its inputs, writes its outputs under RunConfig::out and returns normally;
// failures are reported by exception (UsageError -> exit 2, other errors ->
// exit 1). Outputs depend only on inputs and config, never on time.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "neurotopo/csv.hpp"
#include "neurotopo/errors.hpp"
#include "neurotopo/fitting.hpp"
#include "neurotopo/generator.hpp"
#include "neurotopo/inference.hpp"
#include "neurotopo/morphometry.hpp"
#include "neurotopo/stats.hpp"
#include "neurotopo/swc.hpp"
#include "neurotopo/tree_json.hpp"

namespace neurotopo {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::vector<std::string> inputs;
  std::vector<std::string> real_inputs;     // compare
  std::vector<std::string> virtual_inputs;  // compare
  std::string out = ".";
  std::uint64_t seed = 1;
  std::string model = "inhomogeneous";
  std::optional<double> p, a, b, c;
  std::size_t n = 1000;
  std::string kind = "dendrite";
  int max_order = 10000;
  double min_samples = 10;
  std::size_t min_group_size_virtual = 10;
  std::size_t shuffles = 1000;
  std::size_t group_size = 7;
  std::string format = "json";
  bool allow_supercritical = false;
  bool largest_component = false;
  bool weighted_fit = false;
  bool per_tree_frequencies = false;
  bool pooled_t = false;
  unsigned threads = 1;
};

inline nlohmann::ordered_json config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["inputs"] = c.inputs;
  if (!c.real_inputs.empty()) j["real"] = c.real_inputs;
  if (!c.virtual_inputs.empty()) j["virtual"] = c.virtual_inputs;
  j["seed"] = c.seed;
  j["model"] = c.model;
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr); };
  j["p"] = opt(c.p);
  j["a"] = opt(c.a);
  j["b"] = opt(c.b);
  j["c"] = opt(c.c);
  j["n"] = c.n;
  j["kind"] = c.kind;
  j["max_order"] = c.max_order;
  j["min_samples"] = c.min_samples;
  j["min_group_size_virtual"] = c.min_group_size_virtual;
  j["shuffles"] = c.shuffles;
  j["group_size"] = c.group_size;
  j["format"] = c.format;
  j["allow_supercritical"] = c.allow_supercritical;
  j["largest_component"] = c.largest_component;
  j["weighted_fit"] = c.weighted_fit;
  j["per_tree_frequencies"] = c.per_tree_frequencies;
  j["pooled_t"] = c.pooled_t;
  return j;
}

namespace detail {

namespace fs = std::filesystem;

/// Files named directly, plus files with `extension` inside named directories (sorted, non-recursive).
inline std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs, const std::string& extension) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == extension) found.push_back(e.path());
      }
      std::ranges::sort(found);
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p)) {
      out.push_back(p);
    } else {
      throw UsageError("no such file or directory: " + in);
    }
  }
  return out;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

inline void write_json(const fs::path& path, const nlohmann::ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

inline fs::path ensure_out(const RunConfig& c) {
  fs::path out(c.out);
  fs::create_directories(out);
  return out;
}

inline nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json num_json(double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); }

inline nlohmann::ordered_json sample_json(const SampleSummary& s) {
  nlohmann::ordered_json j;
  j["mean"] = s.n ? num_json(s.mean) : nlohmann::ordered_json(nullptr);
  j["sem"] = opt_json(s.sem);
  j["median"] = s.n ? num_json(s.median) : nlohmann::ordered_json(nullptr);
  j["n"] = s.n;
  return j;
}

inline nlohmann::ordered_json fit_json(const FitResult& f) {
  nlohmann::ordered_json j;
  j["model_form"] = to_string(f.form);
  nlohmann::ordered_json params, se;
  for (const auto& p : f.params) {
    params[p.name] = num_json(p.value);
    se[p.name] = num_json(p.se);
  }
  j["params"] = params;
  j["se"] = se;
  j["rss"] = num_json(f.rss);
  j["n"] = f.n_points;
  j["converged"] = f.converged;
  return j;
}

inline nlohmann::ordered_json test_json(const TestResult& t) {
  nlohmann::ordered_json j;
  j["test_kind"] = to_string(t.kind);
  j["statistic"] = num_json(t.statistic);
  j["p_value"] = num_json(t.p_value);
  if (t.kind == TestKind::pearson) j["r"] = num_json(t.estimate);
  if (t.kind == TestKind::t_one_sample || t.kind == TestKind::t_welch || t.kind == TestKind::t_pooled)
    j["estimate"] = num_json(t.estimate);
  if (t.df1 > 0) j["df1"] = t.df1;
  if (t.df2 > 0) j["df2"] = t.df2;
  j["n"] = t.n1;
  if (t.n2) j["n2"] = t.n2;
  if (t.degenerate) j["degenerate"] = true;
  return j;
}

inline std::string tree_source_label(const fs::path& p) { return p.stem().string(); }

struct Population {
  TreeKind kind;
  Origin origin;
  std::string label() const { return std::string(to_string(kind)) + "/" + std::string(to_string(origin)); }
  auto operator<=>(const Population&) const = default;
};

inline std::vector<MetricsRecord> read_metrics(const std::vector<std::string>& inputs) {
  std::vector<MetricsRecord> out;
  for (const auto& in : inputs) {
    fs::path p(in);
    if (fs::is_directory(p)) p /= "metrics.csv";
    if (!fs::is_regular_file(p)) throw UsageError("no metrics table at " + p.string());
    auto rows = metrics_from_table(CsvTable::read(p));
    out.insert(out.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }
  return out;
}

inline std::vector<ProfileRecord> read_profiles(const std::vector<std::string>& inputs) {
  std::vector<ProfileRecord> out;
  for (const auto& in : inputs) {
    fs::path p(in);
    if (fs::is_directory(p)) p /= "profiles.csv";
    if (!fs::is_regular_file(p)) throw UsageError("no profiles table at " + p.string());
    auto rows = profiles_from_table(CsvTable::read(p));
    out.insert(out.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }
  return out;
}

}  // namespace detail

/// SWC files -> one canonical tree document per neuron.
inline void cmd_parse(const RunConfig& config, std::ostream& log) {
  namespace fs = std::filesystem;
  auto files = detail::expand_inputs(config.inputs, ".swc");
  if (files.empty()) throw UsageError("no input files");
  const auto out = detail::ensure_out(config);
  std::size_t failures = 0;
  std::vector<double> dendrite_counts;
  std::set<std::string> used_names;
  for (const auto& file : files) {
    try {
      const auto swc = read_swc(file);
      auto dec = decompose(swc, {config.largest_component});
      std::string name = file.stem().string();
      for (int i = 2; used_names.contains(name); ++i) name = file.stem().string() + "_" + std::to_string(i);
      used_names.insert(name);
      const std::size_t dendrites = dec.dendrite_count();
      TreeDocument doc{file.filename().string(), dec.dropped_stems, std::move(dec.trees)};
      write_document(out / (name + ".json"), doc);
      log << file.string() << ": ";
      if (doc.trees.empty()) {
        log << "warning: no branching subcomponent, 0 trees kept";
      } else {
        log << "axon N=" << doc.trees.front().branching_count() << (dec.axon_tie ? " (tie)" : "") << ", "
            << dendrites << " dendrites";
        dendrite_counts.push_back(static_cast<double>(dendrites));
      }
      log << ", " << dec.dropped_stems << " stems dropped, " << dec.split_multifurcations
          << " multifurcations split\n";
    } catch (const Error& e) {
      ++failures;
      log << "error: " << file.string() << ": " << e.what() << "\n";
    }
  }
  if (!dendrite_counts.empty()) {
    const auto s = summarize_sample(dendrite_counts);
    log << s.n << " neurons, " << s.mean << " dendrites per neuron";
    if (s.sem) log << " (sem " << *s.sem << ")";
    log << "\n";
  }
  if (failures) throw UsageError(std::to_string(failures) + " of " + std::to_string(files.size()) + " files failed");
}

/// Tree documents -> metrics.csv, profiles.csv, branch_length_by_order.csv, summary.json.
inline void cmd_analyze(const RunConfig& config, std::ostream& log) {
  namespace fs = std::filesystem;
  auto files = detail::expand_inputs(config.inputs, ".json");
  if (files.empty()) throw UsageError("no input files");
  const auto out = detail::ensure_out(config);

  std::vector<MetricsRecord> metrics;
  std::vector<ProfileRecord> profiles;
  std::map<detail::Population, std::vector<NeuronTree>> with_lengths;
  for (const auto& file : files) {
    TreeDocument doc;
    try {
      doc = read_document(file);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    const std::string label = detail::tree_source_label(file);
    for (std::size_t i = 0; i < doc.trees.size(); ++i) {
      const auto& t = doc.trees[i];
      const Origin origin = t.seed ? Origin::virtual_ : Origin::real;
      metrics.push_back({label, i, origin, compute_metrics(t)});
      profiles.push_back({label, i, t.kind(), origin, order_profile(t)});
      if (t.has_lengths()) with_lengths[{t.kind(), origin}].push_back(t);
    }
  }
  detail::write_text(out / "metrics.csv", metrics_table(metrics).write());
  detail::write_text(out / "profiles.csv", profiles_table(profiles).write());

  CsvTable lengths;
  lengths.header = {"kind", "origin", "order", "mean_length", "sem", "n"};
  for (const auto& [pop, trees] : with_lengths) {
    for (const auto& s : branch_length_by_order(trees)) {
      lengths.rows.push_back({std::string(to_string(pop.kind)), std::string(to_string(pop.origin)),
                              std::to_string(s.order), format_number(s.mean), format_number(s.sem),
                              std::to_string(s.n)});
    }
  }
  detail::write_text(out / "branch_length_by_order.csv", lengths.write());

  std::map<detail::Population, std::vector<TreeMetrics>> groups;
  for (const auto& r : metrics) groups[{r.metrics.kind, r.origin}].push_back(r.metrics);
  nlohmann::ordered_json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["config"] = config_json(config);
  auto pops = nlohmann::ordered_json::array();
  for (const auto& [pop, ms] : groups) {
    const auto s = summarize(ms, pop.origin == Origin::real ? 1 : config.min_group_size_virtual);
    nlohmann::ordered_json j;
    j["kind"] = to_string(pop.kind);
    j["origin"] = to_string(pop.origin);
    j["trees"] = s.trees;
    j["N"] = detail::sample_json(s.n);
    j["k_max"] = detail::sample_json(s.k_max);
    j["j_max"] = detail::sample_json(s.j_max);
    j["b_frac"] = detail::sample_json(s.b_frac);
    j["m_frac"] = detail::sample_json(s.m_frac);
    j["s_frac"] = detail::sample_json(s.s_frac);
    j["A"] = detail::sample_json(s.asymmetry);
    j["E_p"] = detail::sample_json(s.excess_asymmetry);
    j["L"] = detail::sample_json(s.total_length);
    auto cond = nlohmann::ordered_json::array();
    for (const auto& c : s.conditional) cond.push_back({{"N", c.n}, {"count", c.count}, {"k_max", c.k_max}, {"j_max", c.j_max}});
    j["conditional"] = cond;
    pops.push_back(j);
    log << pop.label() << ": " << s.trees << " trees, mean N " << s.n.mean;
    if (s.n.sem) log << " (sem " << *s.n.sem << ")";
    log << "\n";
  }
  summary["populations"] = pops;
  detail::write_json(out / "summary.json", summary);
}

namespace detail {

inline std::vector<XY> scaling_points(const std::vector<ConditionalMean>& cond, bool width) {
  std::vector<XY> pts;
  for (const auto& c : cond) pts.push_back({static_cast<double>(c.n), width ? c.j_max : c.k_max});
  return pts;
}

}  // namespace detail

/// Metrics and profiles -> fit_report.json and branching_profile_<kind>_<origin>.csv.
inline void cmd_fit(const RunConfig& config, std::ostream& log) {
  if (config.inputs.empty()) throw UsageError("no input files");
  const auto out = detail::ensure_out(config);
  const auto metrics = detail::read_metrics(config.inputs);
  const auto profiles = detail::read_profiles(config.inputs);

  std::map<detail::Population, std::vector<TreeMetrics>> mgroups;
  for (const auto& r : metrics) mgroups[{r.metrics.kind, r.origin}].push_back(r.metrics);
  std::map<detail::Population, std::vector<OrderProfile>> pgroups;
  for (const auto& r : profiles) pgroups[{r.kind, r.origin}].push_back(r.profile);

  nlohmann::ordered_json report;
  report["schema_version"] = kSchemaVersion;
  report["config"] = config_json(config);
  auto pops = nlohmann::ordered_json::array();
  for (const auto& [pop, ms] : mgroups) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(pop.kind);
    j["origin"] = to_string(pop.origin);
    j["trees"] = ms.size();
    const std::string tag = std::string(to_string(pop.kind)) + "_" + std::string(to_string(pop.origin));

    if (auto it = pgroups.find(pop); it != pgroups.end()) {
      const auto prof = estimate_branching_frequencies(it->second, {config.min_samples, config.per_tree_frequencies});
      CsvTable t;
      t.header = {"order", "branching_count", "total_count", "frequency", "included_in_fit"};
      for (const auto& o : prof.orders) {
        t.rows.push_back({std::to_string(o.order), format_number(o.branching), format_number(o.total),
                          format_number(o.frequency), o.included ? "1" : "0"});
      }
      detail::write_text(out / ("branching_profile_" + tag + ".csv"), t.write());
      j["included_orders"] = prof.included_count();
      if (prof.included_count() < 4) {
        j["branching_fit"] = {{"skipped", "fewer than 4 orders with more than " + format_number(config.min_samples) +
                                              " nodes (found " + std::to_string(prof.included_count()) + ")"}};
        log << pop.label() << ": branching fit skipped, " << prof.included_count() << " usable orders\n";
      } else {
        try {
          const auto plateau = fit_exp_plateau(prof, config.weighted_fit);
          const auto zero = fit_exp_zero(prof, config.weighted_fit);
          const auto ftest = f_test_nested(zero, plateau);
          j["branching_fit"] = {{"exp_plateau", detail::fit_json(plateau)},
                                {"exp_zero", detail::fit_json(zero)},
                                {"f_test", detail::test_json(ftest)}};
          log << pop.label() << ": p_k = " << plateau.value("b") << " exp(-" << plateau.value("a") << " k) + "
              << plateau.value("c") << ", plateau vs zero F-test p = " << ftest.p_value << "\n";
        } catch (const FitError& e) {
          j["branching_fit"] = {{"skipped", e.what()}};
        }
      }
    }

    const auto cond = conditional_means(ms, pop.origin == Origin::real ? 1 : config.min_group_size_virtual);
    const auto kpts = detail::scaling_points(cond, false);
    const auto jpts = detail::scaling_points(cond, true);
    if (kpts.size() < 3) {
      j["scaling"] = {{"skipped", "fewer than 3 tree-size groups (found " + std::to_string(kpts.size()) + ")"}};
    } else {
      try {
        const auto lam = fit_power_law(kpts);
        const auto tau = fit_power_law(jpts);
        j["scaling"] = {{"k_max", detail::fit_json(lam)},
                        {"j_max", detail::fit_json(tau)},
                        {"slope_equality", detail::test_json(f_test_slope_equality(lam, tau, kpts, jpts))}};
        log << pop.label() << ": lambda = " << lam.value("exponent") << ", tau = " << tau.value("exponent") << "\n";
      } catch (const Error& e) {
        j["scaling"] = {{"skipped", e.what()}};
      }
    }

    std::vector<SizeLength> sl;
    std::vector<double> ns, ls, eps;
    for (const auto& m : ms) {
      if (m.total_length) {
        sl.push_back({static_cast<double>(m.n), *m.total_length});
        ns.push_back(static_cast<double>(m.n));
        ls.push_back(*m.total_length);
      }
      if (m.excess_asymmetry) eps.push_back(*m.excess_asymmetry);
    }
    if (!sl.empty()) {
      j["total_length"] = detail::fit_json(fit_total_length(sl));
      try {
        j["size_length_correlation"] = detail::test_json(pearson(ns, ls));
      } catch (const DomainError& e) {
        j["size_length_correlation"] = {{"skipped", e.what()}};
      }
    }
    if (eps.size() >= 2) j["excess_asymmetry_zero_mean"] = detail::test_json(t_test_zero_mean(eps));
    pops.push_back(j);
  }
  report["populations"] = pops;

  // axon vs dendrite asymmetry within each origin
  auto comparisons = nlohmann::ordered_json::array();
  for (Origin origin : {Origin::real, Origin::virtual_}) {
    auto ax = mgroups.find({TreeKind::axon, origin});
    auto de = mgroups.find({TreeKind::dendrite, origin});
    if (ax == mgroups.end() || de == mgroups.end()) continue;
    std::vector<double> a1, a2;
    for (const auto& m : ax->second)
      if (m.asymmetry) a1.push_back(*m.asymmetry);
    for (const auto& m : de->second)
      if (m.asymmetry) a2.push_back(*m.asymmetry);
    if (a1.size() < 2 || a2.size() < 2) continue;
    auto t = detail::test_json(t_test_two_sample(a1, a2, config.pooled_t));
    t["origin"] = to_string(origin);
    t["quantity"] = "A";
    comparisons.push_back(t);
  }
  report["axon_vs_dendrite"] = comparisons;
  detail::write_json(out / "fit_report.json", report);
}

inline BranchModel model_from_config(const RunConfig& config) {
  BranchModel model;
  model.max_order = config.max_order;
  model.allow_supercritical = config.allow_supercritical;
  if (config.model == "homogeneous") {
    if (!config.p) throw UsageError("homogeneous model needs --p");
    model.variant = Homogeneous{*config.p};
  } else if (config.model == "inhomogeneous") {
    if (!config.a || !config.b || !config.c) throw UsageError("inhomogeneous model needs --a, --b and --c");
    model.variant = Inhomogeneous{*config.a, *config.b, *config.c};
  } else {
    throw UsageError("unknown model '" + config.model + "'");
  }
  try {
    validate(model);
  } catch (const DivergenceError& e) {
    throw UsageError(std::string(e.what()) + "; pass --allow-supercritical to generate anyway");
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  return model;
}

/// Virtual population -> manifest.json plus trees.json (format json) or
/// metrics.csv and profiles.csv (format csv).
inline void cmd_generate(const RunConfig& config, std::ostream& log) {
  const auto model = model_from_config(config);
  if (config.n < 1) throw UsageError("--n must be at least 1");
  if (config.format != "json" && config.format != "csv") throw UsageError("--format must be csv or json");
  const TreeKind kind = [&] {
    try {
      return tree_kind_from_string(config.kind);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }();
  const auto out = detail::ensure_out(config);

  std::vector<MetricsRecord> metrics(config.n);
  std::vector<ProfileRecord> profiles(config.format == "csv" ? config.n : 0);
  TreeDocument doc;
  doc.source = "virtual:" + describe(model);
  if (config.format == "json") doc.trees.resize(config.n);
  const std::string label = "virtual";
  generate_population_into(
      model, config.n, config.seed, kind,
      [&](std::size_t i, NeuronTree&& t) {
        metrics[i] = {label, i, Origin::virtual_, compute_metrics(t)};
        if (config.format == "csv") {
          profiles[i] = {label, i, kind, Origin::virtual_, order_profile(t)};
        } else {
          doc.trees[i] = std::move(t);
        }
      },
      config.threads);

  std::vector<double> sizes;
  for (const auto& m : metrics) sizes.push_back(static_cast<double>(m.metrics.n));
  const auto s = summarize_sample(sizes);

  nlohmann::ordered_json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["config"] = config_json(config);
  manifest["model"] = describe(model);
  manifest["seed"] = config.seed;
  manifest["n"] = config.n;
  manifest["predicted_mean_N"] = is_subcritical(model) ? nlohmann::ordered_json(mean_size(model)) : nlohmann::ordered_json(nullptr);
  manifest["empirical_mean_N"] = s.mean;
  manifest["empirical_sem_N"] = detail::opt_json(s.sem);
  if (config.format == "json") {
    write_document(out / "trees.json", doc);
    manifest["files"] = {"trees.json"};
  } else {
    detail::write_text(out / "metrics.csv", metrics_table(metrics).write());
    detail::write_text(out / "profiles.csv", profiles_table(profiles).write());
    manifest["files"] = {"metrics.csv", "profiles.csv"};
  }
  detail::write_json(out / "manifest.json", manifest);
  log << describe(model) << ": " << config.n << " trees, mean N " << s.mean;
  if (is_subcritical(model)) log << " (predicted " << mean_size(model) << ")";
  log << "\n";
}

/// Real vs virtual metrics -> relative differences of means and KS tests.
inline void cmd_compare(const RunConfig& config, std::ostream& log) {
  if (config.real_inputs.empty() || config.virtual_inputs.empty()) throw UsageError("compare needs --real and --virtual");
  if (config.format != "json" && config.format != "csv") throw UsageError("--format must be csv or json");
  const auto out = detail::ensure_out(config);
  const auto real = detail::read_metrics(config.real_inputs);
  const auto virt = detail::read_metrics(config.virtual_inputs);
  if (real.empty() || virt.empty()) throw Error("cannot compare empty populations");

  struct Quantity {
    const char* name;
    double (*get)(const TreeMetrics&);
    bool ks;
  };
  static const Quantity quantities[] = {
      {"N", [](const TreeMetrics& m) { return static_cast<double>(m.n); }, true},
      {"B_percent", [](const TreeMetrics& m) { return 100.0 * m.b_frac; }, false},
      {"k_max", [](const TreeMetrics& m) { return static_cast<double>(m.k_max); }, true},
      {"j_max", [](const TreeMetrics& m) { return static_cast<double>(m.j_max); }, true},
      {"A", [](const TreeMetrics& m) { return m.asymmetry.value_or(std::numeric_limits<double>::quiet_NaN()); }, false},
  };

  nlohmann::ordered_json report;
  report["schema_version"] = kSchemaVersion;
  report["config"] = config_json(config);
  auto rows = nlohmann::ordered_json::array();
  CsvTable table;
  table.header = {"kind", "quantity", "real_mean", "virtual_mean", "relative_difference", "ks_D", "ks_p"};
  std::size_t compared = 0;
  for (TreeKind kind : {TreeKind::axon, TreeKind::dendrite}) {
    std::vector<const TreeMetrics*> r, v;
    for (const auto& m : real)
      if (m.metrics.kind == kind) r.push_back(&m.metrics);
    for (const auto& m : virt)
      if (m.metrics.kind == kind) v.push_back(&m.metrics);
    if (r.empty() || v.empty()) continue;
    ++compared;
    for (const auto& q : quantities) {
      std::vector<double> xr, xv;
      for (auto* m : r)
        if (double x = q.get(*m); std::isfinite(x)) xr.push_back(x);
      for (auto* m : v)
        if (double x = q.get(*m); std::isfinite(x)) xv.push_back(x);
      nlohmann::ordered_json row;
      row["kind"] = to_string(kind);
      row["quantity"] = q.name;
      std::optional<double> mr, mv, rel, d, p;
      if (!xr.empty()) mr = mean(xr);
      if (!xv.empty()) mv = mean(xv);
      if (mr && mv && *mr != 0.0) rel = (*mv - *mr) / *mr;
      if (q.ks && !xr.empty() && !xv.empty()) {
        const auto ks = ks_two_sample(xr, xv);
        d = ks.statistic;
        p = ks.p_value;
      }
      row["real_mean"] = detail::opt_json(mr);
      row["virtual_mean"] = detail::opt_json(mv);
      row["relative_difference"] = detail::opt_json(rel);
      row["ks_D"] = detail::opt_json(d);
      row["ks_p"] = detail::opt_json(p);
      row["n_real"] = xr.size();
      row["n_virtual"] = xv.size();
      rows.push_back(row);
      table.rows.push_back({std::string(to_string(kind)), q.name, format_number(mr), format_number(mv),
                            format_number(rel), format_number(d), format_number(p)});
      log << to_string(kind) << " " << q.name << ": relative difference " << format_number(rel);
      if (p) log << ", KS p " << *p;
      log << "\n";
    }
  }
  if (!compared) throw Error("no tree kind present in both populations");
  report["comparisons"] = rows;
  if (config.format == "json")
    detail::write_json(out / "compare_report.json", report);
  else
    detail::write_text(out / "compare_report.csv", table.write());
}

/// Dendrite shuffling among neurons with exactly `group_size` dendrites.
inline void cmd_shuffle(const RunConfig& config, std::ostream& log) {
  if (config.inputs.empty()) throw UsageError("no input files");
  if (config.group_size < 1) throw UsageError("--group-size must be positive");
  const auto out = detail::ensure_out(config);
  const auto metrics = detail::read_metrics(config.inputs);
  std::map<std::string, std::vector<double>> by_neuron;
  for (const auto& m : metrics) {
    if (m.metrics.kind == TreeKind::dendrite) by_neuron[m.source].push_back(static_cast<double>(m.metrics.n));
  }
  std::vector<std::vector<double>> groups;
  std::vector<std::string> names;
  for (auto& [name, sizes] : by_neuron) {
    if (sizes.size() != config.group_size) continue;
    names.push_back(name);
    groups.push_back(sizes);
  }
  if (groups.size() < 2) {
    throw Error("need at least 2 neurons with exactly " + std::to_string(config.group_size) + " dendrites, found " +
                std::to_string(groups.size()));
  }
  const auto res = shuffle_test_dendrite_sizes(groups, config.shuffles, config.seed);
  const auto hist = make_histogram(res.shuffled, 20);

  nlohmann::ordered_json report;
  report["schema_version"] = kSchemaVersion;
  report["config"] = config_json(config);
  report["neurons"] = names;
  report["group_size"] = res.group_size;
  report["observed_sd"] = res.observed;
  report["shuffles"] = res.shuffled.size();
  report["fraction_greater"] = res.fraction_greater;
  detail::write_json(out / "shuffle_report.json", report);
  CsvTable t;
  t.header = {"bin_low", "bin_high", "count"};
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    const double lo = hist.low + hist.width * static_cast<double>(i);
    t.rows.push_back({format_number(lo), format_number(lo + hist.width), std::to_string(hist.counts[i])});
  }
  detail::write_text(out / "shuffle_histogram.csv", t.write());
  log << res.groups << " neurons x " << res.group_size << " dendrites: observed sd " << res.observed << ", "
      << 100.0 * res.fraction_greater << "% of " << res.shuffled.size() << " shuffles exceed it\n";
}

}  // namespace neurotopo
