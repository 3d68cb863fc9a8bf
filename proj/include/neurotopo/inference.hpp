#pragma once

// Branching-frequency estimation over tree populations and the dendrite
// shuffling test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "neurotopo/errors.hpp"
#include "neurotopo/fitting.hpp"
#include "neurotopo/rng.hpp"
#include "neurotopo/stats.hpp"
#include "neurotopo/topology.hpp"
#include "neurotopo/tree.hpp"

namespace neurotopo {

struct OrderFrequency {
  int order = 0;
  double branching = 0.0;  // pooled j_k
  double total = 0.0;      // pooled node count at order k (the sample size n_k)
  double frequency = 0.0;
  bool included = false;   // enters the decay fits
};

struct BranchingProfilePopulation {
  std::vector<OrderFrequency> orders;  // orders 1..max, contiguous

  /// Included orders as fit input; weights are n_k when `weighted`.
  std::vector<DecayPoint> fit_points(bool weighted = false) const {
    std::vector<DecayPoint> out;
    for (const auto& o : orders) {
      if (o.included) out.push_back({static_cast<double>(o.order), o.frequency, weighted ? o.total : 1.0});
    }
    return out;
  }
  std::size_t included_count() const {
    return static_cast<std::size_t>(std::ranges::count_if(orders, [](const OrderFrequency& o) { return o.included; }));
  }
};

struct FrequencyOptions {
  double min_samples = 10;  // orders need n_k > min_samples to enter fits
  bool per_tree_average = false;
};

/// Pools per-order profiles. Order 1 never enters the fits: it branches by
/// construction.
inline BranchingProfilePopulation estimate_branching_frequencies(std::span<const OrderProfile> profiles,
                                                                 const FrequencyOptions& options = {}) {
  if (profiles.empty()) throw DomainError("cannot estimate branching frequencies of an empty population");
  int k_max = 0;
  for (const auto& p : profiles) k_max = std::max(k_max, p.k_max);
  BranchingProfilePopulation out;
  out.orders.resize(static_cast<std::size_t>(std::max(k_max, 1)));
  std::vector<double> per_tree_sum(out.orders.size(), 0.0);
  std::vector<double> per_tree_count(out.orders.size(), 0.0);
  for (std::size_t i = 0; i < out.orders.size(); ++i) out.orders[i].order = static_cast<int>(i + 1);
  for (const auto& p : profiles) {
    for (int k = 1; k <= p.k_max; ++k) {
      auto& o = out.orders[static_cast<std::size_t>(k - 1)];
      const double total = k == 1 ? 1.0 : 2.0 * static_cast<double>(p.j(k - 1));
      o.branching += static_cast<double>(p.j(k));
      o.total += total;
      if (total > 0.0) {
        per_tree_sum[static_cast<std::size_t>(k - 1)] += static_cast<double>(p.j(k)) / total;
        per_tree_count[static_cast<std::size_t>(k - 1)] += 1.0;
      }
    }
  }
  for (std::size_t i = 0; i < out.orders.size(); ++i) {
    auto& o = out.orders[i];
    if (options.per_tree_average) {
      o.frequency = per_tree_count[i] > 0.0 ? per_tree_sum[i] / per_tree_count[i] : 0.0;
    } else {
      o.frequency = o.total > 0.0 ? o.branching / o.total : 0.0;
    }
    o.included = o.order >= 2 && o.total > options.min_samples;
  }
  return out;
}

inline BranchingProfilePopulation estimate_branching_frequencies(std::span<const NeuronTree> trees,
                                                                 const FrequencyOptions& options = {}) {
  std::vector<OrderProfile> profiles;
  profiles.reserve(trees.size());
  for (const auto& t : trees) profiles.push_back(order_profile(t));
  return estimate_branching_frequencies(profiles, options);
}

inline FitResult fit_exp_plateau(const BranchingProfilePopulation& profile, bool weighted = false) {
  const auto pts = profile.fit_points(weighted);
  return fit_exp_plateau(pts);
}

inline FitResult fit_exp_zero(const BranchingProfilePopulation& profile, bool weighted = false) {
  const auto pts = profile.fit_points(weighted);
  return fit_exp_zero(pts);
}

struct ShuffleResult {
  double observed = 0.0;
  double fraction_greater = 0.0;
  std::vector<double> shuffled;  // statistic per replicate, in replicate order
  std::size_t groups = 0;
  std::size_t group_size = 0;
};

namespace detail {

// Sample sd (n - 1) of group means. Values and means are summed in sorted
// order so equal partitions give bit-identical statistics.
inline double sd_of_group_means(std::span<const double> values, std::size_t group_size) {
  const std::size_t groups = values.size() / group_size;
  std::vector<double> means(groups);
  std::vector<double> buf(group_size);
  for (std::size_t g = 0; g < groups; ++g) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(g * group_size), group_size, buf.begin());
    std::ranges::sort(buf);
    means[g] = std::accumulate(buf.begin(), buf.end(), 0.0) / static_cast<double>(group_size);
  }
  std::ranges::sort(means);
  return stddev(means);
}

}  // namespace detail

/// Observed sd of per-neuron mean dendrite size versus `n_shuffles` random
/// repartitions of the pooled dendrites into groups of the same size.
inline ShuffleResult shuffle_test_dendrite_sizes(std::span<const std::vector<double>> groups, std::size_t n_shuffles,
                                                 std::uint64_t seed) {
  if (groups.size() < 2) throw DomainError("shuffle test needs at least 2 neurons");
  if (n_shuffles < 1) throw DomainError("shuffle test needs at least 1 shuffle");
  const std::size_t size = groups.front().size();
  if (size == 0) throw DomainError("shuffle test groups must be non-empty");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    if (g.size() != size) throw DomainError("shuffle test needs groups of equal size");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  ShuffleResult out;
  out.groups = groups.size();
  out.group_size = size;
  out.observed = detail::sd_of_group_means(pooled, size);

  std::ranges::sort(pooled);  // makes the result independent of input ordering
  std::vector<double> work(pooled.size());
  out.shuffled.reserve(n_shuffles);
  std::size_t greater = 0;
  for (std::size_t rep = 0; rep < n_shuffles; ++rep) {
    std::ranges::copy(pooled, work.begin());
    Xoshiro256 rng(derive_seed(seed, rep));
    for (std::size_t i = work.size() - 1; i > 0; --i) std::swap(work[i], work[rng.below(i + 1)]);
    const double stat = detail::sd_of_group_means(work, size);
    out.shuffled.push_back(stat);
    greater += stat > out.observed;
  }
  out.fraction_greater = static_cast<double>(greater) / static_cast<double>(n_shuffles);
  return out;
}

}  // namespace neurotopo
