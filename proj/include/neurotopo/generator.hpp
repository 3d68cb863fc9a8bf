#pragma once

// Virtual trees from an order-wise stochastic branching process on a rooted
// 3-Cayley tree. The order-1 node always bifurcates; every node at order
// k >= 2 independently bifurcates with probability p_k, otherwise it is a
// terminal.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "neurotopo/errors.hpp"
#include "neurotopo/rng.hpp"
#include "neurotopo/tree.hpp"

namespace neurotopo {

struct Homogeneous {
  double p = 0.0;
};

/// p_k = min{b exp(-a k) + c, 1} for k >= 2.
struct Inhomogeneous {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

struct BranchModel {
  std::variant<Homogeneous, Inhomogeneous> variant;
  int max_order = 10000;
  std::size_t max_nodes = std::size_t{1} << 22;
  bool allow_supercritical = false;
};

inline std::string describe(const BranchModel& model) {
  if (const auto* h = std::get_if<Homogeneous>(&model.variant)) return "homogeneous(p=" + std::to_string(h->p) + ")";
  const auto& i = std::get<Inhomogeneous>(model.variant);
  return "inhomogeneous(a=" + std::to_string(i.a) + ", b=" + std::to_string(i.b) + ", c=" + std::to_string(i.c) + ")";
}

inline double branching_probability(const BranchModel& model, int k) {
  if (k < 1) throw DomainError("order must be >= 1");
  if (k == 1) return 1.0;
  if (const auto* h = std::get_if<Homogeneous>(&model.variant)) return h->p;
  const auto& m = std::get<Inhomogeneous>(model.variant);
  return std::min(m.b * std::exp(-m.a * k) + m.c, 1.0);
}

/// Branching probability as k -> infinity.
inline double limiting_probability(const BranchModel& model) {
  if (const auto* h = std::get_if<Homogeneous>(&model.variant)) return h->p;
  const auto& m = std::get<Inhomogeneous>(model.variant);
  return std::min(m.a > 0.0 ? m.c : m.b + m.c, 1.0);
}

inline bool is_subcritical(const BranchModel& model) { return limiting_probability(model) < 0.5; }

inline void validate(const BranchModel& model) {
  if (const auto* h = std::get_if<Homogeneous>(&model.variant)) {
    if (!(h->p >= 0.0 && h->p <= 1.0)) throw DomainError("p must lie in [0, 1]");
  } else {
    const auto& m = std::get<Inhomogeneous>(model.variant);
    if (!(m.a >= 0.0) || !(m.b >= 0.0) || !(m.c >= 0.0) || !(m.c <= 1.0))
      throw DomainError("inhomogeneous model needs a >= 0, b >= 0, 0 <= c <= 1");
  }
  if (model.max_order < 1) throw DomainError("max_order must be positive");
  if (!is_subcritical(model) && !model.allow_supercritical) {
    throw DivergenceError(describe(model) + " is supercritical (limiting branching probability >= 1/2)");
  }
}

/// Expected tree size by summing 1 + sum_{k>=2} 2^{k-1} prod_{m=2..k} p_m.
/// Terms are accumulated recursively, so no power of two is formed.
inline double mean_size_series(const BranchModel& model, double rel_tol = 1e-12, std::size_t max_terms = 1000000) {
  if (!is_subcritical(model)) throw DivergenceError(describe(model) + ": mean tree size diverges");
  double sum = 1.0;
  double term = 1.0;
  for (std::size_t k = 2; k < max_terms + 2; ++k) {
    term *= 2.0 * branching_probability(model, static_cast<int>(k));
    sum += term;
    if (term < rel_tol * sum) return sum;
  }
  throw DivergenceError(describe(model) + ": series did not converge within " + std::to_string(max_terms) + " terms");
}

/// Expected tree size: 1 / (1 - 2p) for the homogeneous model, the series otherwise.
inline double mean_size(const BranchModel& model) {
  if (const auto* h = std::get_if<Homogeneous>(&model.variant)) {
    if (!(h->p < 0.5)) throw DivergenceError("mean tree size diverges for p >= 1/2");
    return 1.0 / (1.0 - 2.0 * h->p);
  }
  return mean_size_series(model);
}

/// Constant branching probability whose expected tree size is `target_mean`.
inline double solve_homogeneous_p(double target_mean) {
  if (!(target_mean >= 1.0) || std::isinf(target_mean)) throw DomainError("target mean tree size must be >= 1");
  return (1.0 - 1.0 / target_mean) / 2.0;
}

/// Generates one tree breadth-first, one order at a time. The result is a
/// pure function of (model, seed). Lengths are absent.
inline NeuronTree generate(const BranchModel& model, std::uint64_t seed, TreeKind kind = TreeKind::dendrite) {
  validate(model);
  Xoshiro256 rng(seed);
  NeuronTree tree(kind, false);
  tree.seed = seed;
  std::vector<NodeIndex> frontier{tree.add_child(0)};
  std::vector<NodeIndex> next;
  for (int k = 1; !frontier.empty(); ++k) {
    const double p = branching_probability(model, k);
    next.clear();
    for (const NodeIndex node : frontier) {
      const bool branch = p >= 1.0 ? true : (p <= 0.0 ? false : rng.bernoulli(p));
      if (!branch) continue;
      if (k + 1 > model.max_order || tree.size() + 2 > model.max_nodes) {
        throw TruncationError(describe(model) + " seed " + std::to_string(seed) + ": tree exceeds max_order " +
                              std::to_string(model.max_order) + " or max_nodes " + std::to_string(model.max_nodes));
      }
      next.push_back(tree.add_child(node));
      next.push_back(tree.add_child(node));
    }
    frontier.swap(next);
  }
  return tree;
}

/// Failed indices from generate_population, reported together.
class PopulationTruncationError : public TruncationError {
 public:
  PopulationTruncationError(const std::string& what, std::vector<std::size_t> indices)
      : TruncationError(what), indices_(std::move(indices)) {}
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

/// Tree i uses seed derive_seed(master_seed, i); the output does not depend
/// on `threads`.
template <typename Sink>
void generate_population_into(const BranchModel& model, std::size_t count, std::uint64_t master_seed, TreeKind kind,
                              Sink&& sink, unsigned threads = 1) {
  validate(model);
  if (count < 1) throw DomainError("population size must be >= 1");
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  std::vector<std::vector<std::size_t>> failed(threads);
  std::vector<std::string> first_error(threads);
  auto work = [&](unsigned t) {
    for (std::size_t i = t; i < count; i += threads) {
      try {
        sink(i, generate(model, derive_seed(master_seed, i), kind));
      } catch (const TruncationError& e) {
        if (failed[t].empty()) first_error[t] = e.what();
        failed[t].push_back(i);
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
  }
  std::vector<std::size_t> all;
  std::string msg;
  for (unsigned t = 0; t < threads; ++t) {
    all.insert(all.end(), failed[t].begin(), failed[t].end());
    if (msg.empty()) msg = first_error[t];
  }
  if (!all.empty()) {
    std::ranges::sort(all);
    auto what = std::to_string(all.size()) + " trees truncated (first index " + std::to_string(all.front()) + "): " + msg;
    throw PopulationTruncationError(what, std::move(all));
  }
}

inline std::vector<NeuronTree> generate_population(const BranchModel& model, std::size_t count,
                                                   std::uint64_t master_seed, TreeKind kind = TreeKind::dendrite,
                                                   unsigned threads = 1) {
  std::vector<NeuronTree> out(count);
  generate_population_into(
      model, count, master_seed, kind, [&](std::size_t i, NeuronTree&& t) { out[i] = std::move(t); }, threads);
  return out;
}

}  // namespace neurotopo
