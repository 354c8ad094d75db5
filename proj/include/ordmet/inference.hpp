#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "ordmet/reference.hpp"
#include "ordmet/responsiveness.hpp"
#include "ordmet/rng.hpp"

namespace ordmet {

struct ResampleConfig {
  int bootstrap_trials = 100;
  int permutations = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;

  void validate() const {
    if (bootstrap_trials < 1) throw ValidationError("bootstrap_trials must be >= 1");
    if (permutations < 1) throw ValidationError("permutations must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must be in (0, 1)");
  }
};

struct IntervalResult {
  double point = 0.0;
  std::optional<double> lo;
  std::optional<double> hi;
  int trials = 0;
  int undefined_trials = 0;

  bool defined() const { return lo.has_value() && hi.has_value(); }
};

struct PermutationResult {
  double observed_diff = 0.0;
  double p_value = 1.0;
  int permutations = 0;
  int undefined_permutations = 0;
};

// Runs fn(0..n-1) on up to `workers` threads. Each index must write only its
// own slot of any shared output, and all randomness must be keyed by the
// index, so results never depend on scheduling.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int count = std::min<int>(workers, static_cast<int>(n));
  pool.reserve(count);
  for (int w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

namespace detail {

// Pair indices grouped by item, in sorted item order.
struct ItemGroups {
  std::vector<std::string> items;
  std::vector<std::vector<std::size_t>> indices;
};

inline ItemGroups group_pairs_by_item(const ReferencePairSet& pairs) {
  std::map<std::string, std::vector<std::size_t>> by_item;
  for (std::size_t i = 0; i < pairs.pairs.size(); ++i) {
    by_item[pairs.pairs[i].item_id].push_back(i);
  }
  ItemGroups g;
  for (auto& [item, idx] : by_item) {
    g.items.push_back(item);
    g.indices.push_back(std::move(idx));
  }
  return g;
}

// One bootstrap replica: items drawn with replacement, every pair of a drawn
// item entering together (pairs within an item are dependent).
inline ReferencePairSet resample_items(const ReferencePairSet& pairs, const ItemGroups& groups,
                                       KeyedRng& rng) {
  ReferencePairSet replica;
  replica.scale = pairs.scale;
  replica.reference_kind = pairs.reference_kind;
  replica.boundary = pairs.boundary;
  replica.evaluated_unit = pairs.evaluated_unit;
  const std::size_t m = groups.items.size();
  replica.pairs.reserve(pairs.pairs.size());
  for (std::size_t draw = 0; draw < m; ++draw) {
    const std::size_t pick = rng.uniform_below(m);
    for (std::size_t idx : groups.indices[pick]) replica.pairs.push_back(pairs.pairs[idx]);
  }
  return replica;
}

// Percentile of a sorted sample with linear interpolation between order
// statistics (the common "type 7" convention).
inline double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline KeyedRng bootstrap_trial_rng(std::uint64_t seed, int trial) {
  return KeyedRng(seed).child("bootstrap").child(static_cast<std::uint64_t>(trial));
}

inline KeyedRng permutation_rng(std::uint64_t seed, int perm) {
  return KeyedRng(seed).child("permutation").child(static_cast<std::uint64_t>(perm));
}

}  // namespace detail

// Percentile bootstrap over items. The point estimate always comes from the
// full data; trial i draws its replica from a child generator keyed by
// (seed, i), so the interval is identical for any worker count. The interval
// is left undefined when the metric fails on more than 20% of replicas.
inline IntervalResult bootstrap_ci(
    const std::function<std::optional<double>(const ReferencePairSet&)>& metric,
    const ReferencePairSet& pairs, const ResampleConfig& cfg, int workers = 1) {
  cfg.validate();
  if (pairs.pairs.empty()) throw ValidationError("bootstrap_ci: empty pair set");
  IntervalResult out;
  out.trials = cfg.bootstrap_trials;
  const auto point = metric(pairs);
  if (!point) {
    out.undefined_trials = cfg.bootstrap_trials;
    return out;
  }
  out.point = *point;

  const auto groups = detail::group_pairs_by_item(pairs);
  std::vector<std::optional<double>> values(cfg.bootstrap_trials);
  parallel_for(static_cast<std::size_t>(cfg.bootstrap_trials), workers, [&](std::size_t i) {
    KeyedRng rng = detail::bootstrap_trial_rng(cfg.seed, static_cast<int>(i));
    values[i] = metric(detail::resample_items(pairs, groups, rng));
  });

  std::vector<double> defined;
  defined.reserve(values.size());
  for (const auto& v : values) {
    if (v) defined.push_back(*v);
    else out.undefined_trials++;
  }
  if (out.undefined_trials * 5 > cfg.bootstrap_trials) return out;  // > 20% failed
  std::sort(defined.begin(), defined.end());
  out.lo = detail::percentile(defined, cfg.alpha / 2.0);
  out.hi = detail::percentile(defined, 1.0 - cfg.alpha / 2.0);
  return out;
}

// Same scheme for a macro-averaged metric over several pair sets sharing an
// item universe (one crowd reference per boundary): each trial draws one
// item sample and applies it to every set, so the replicas stay coupled.
inline IntervalResult bootstrap_ci_macro(
    const std::function<std::optional<double>(std::span<const ReferencePairSet>)>& metric,
    std::span<const ReferencePairSet> sets, const ResampleConfig& cfg, int workers = 1) {
  cfg.validate();
  if (sets.empty()) throw ValidationError("bootstrap_ci_macro: no pair sets");
  IntervalResult out;
  out.trials = cfg.bootstrap_trials;
  const auto point = metric(sets);
  if (!point) {
    out.undefined_trials = cfg.bootstrap_trials;
    return out;
  }
  out.point = *point;

  std::vector<detail::ItemGroups> groups;
  groups.reserve(sets.size());
  for (const auto& s : sets) groups.push_back(detail::group_pairs_by_item(s));
  const std::size_t m = groups.front().items.size();

  std::vector<std::optional<double>> values(cfg.bootstrap_trials);
  parallel_for(static_cast<std::size_t>(cfg.bootstrap_trials), workers, [&](std::size_t i) {
    KeyedRng rng = detail::bootstrap_trial_rng(cfg.seed, static_cast<int>(i));
    std::vector<std::size_t> picks(m);
    for (std::size_t d = 0; d < m; ++d) picks[d] = rng.uniform_below(m);
    std::vector<ReferencePairSet> replicas;
    replicas.reserve(sets.size());
    for (std::size_t k = 0; k < sets.size(); ++k) {
      ReferencePairSet rep;
      rep.scale = sets[k].scale;
      rep.reference_kind = sets[k].reference_kind;
      rep.boundary = sets[k].boundary;
      rep.evaluated_unit = sets[k].evaluated_unit;
      for (std::size_t pick : picks) {
        // boundaries share the item universe; guard for safety
        if (pick < groups[k].indices.size()) {
          for (std::size_t idx : groups[k].indices[pick]) {
            rep.pairs.push_back(sets[k].pairs[idx]);
          }
        }
      }
      replicas.push_back(std::move(rep));
    }
    values[i] = metric(replicas);
  });

  std::vector<double> defined;
  for (const auto& v : values) {
    if (v) defined.push_back(*v);
    else out.undefined_trials++;
  }
  if (out.undefined_trials * 5 > cfg.bootstrap_trials) return out;
  std::sort(defined.begin(), defined.end());
  out.lo = detail::percentile(defined, cfg.alpha / 2.0);
  out.hi = detail::percentile(defined, 1.0 - cfg.alpha / 2.0);
  return out;
}

// Two-sided permutation test for a difference between two disjoint rater
// groups. The null relabels whole raters (group sizes preserved) and the
// caller's metric recomputes its full pipeline per relabeling. Add-one
// smoothing keeps p > 0; permutations whose metric is undefined count as
// extreme rather than being dropped.
inline PermutationResult permutation_test(
    const std::function<std::optional<double>(const std::set<std::string>&)>& group_metric,
    const std::set<std::string>& group_a, const std::set<std::string>& group_b,
    const ResampleConfig& cfg, int workers = 1) {
  cfg.validate();
  if (group_a.empty() || group_b.empty()) {
    throw ValidationError("permutation_test: both groups must be non-empty");
  }
  for (const auto& r : group_a) {
    if (group_b.contains(r)) {
      throw ValidationError("permutation_test: groups must be disjoint (share '" + r + "')");
    }
  }
  const auto ma = group_metric(group_a);
  const auto mb = group_metric(group_b);
  if (!ma || !mb) {
    throw ValidationError("permutation_test: metric undefined on an observed group");
  }
  PermutationResult out;
  out.observed_diff = *ma - *mb;
  out.permutations = cfg.permutations;

  std::vector<std::string> pool(group_a.begin(), group_a.end());
  pool.insert(pool.end(), group_b.begin(), group_b.end());
  std::sort(pool.begin(), pool.end());
  const std::size_t na = group_a.size();

  const double threshold = std::abs(out.observed_diff);
  std::vector<int> extreme(cfg.permutations, 0);
  std::vector<int> undefined(cfg.permutations, 0);
  parallel_for(static_cast<std::size_t>(cfg.permutations), workers, [&](std::size_t i) {
    KeyedRng rng = detail::permutation_rng(cfg.seed, static_cast<int>(i));
    std::vector<std::string> shuffled = pool;
    for (std::size_t k = shuffled.size() - 1; k > 0; --k) {
      const std::size_t j = rng.uniform_below(k + 1);
      std::swap(shuffled[k], shuffled[j]);
    }
    std::set<std::string> a(shuffled.begin(), shuffled.begin() + na);
    std::set<std::string> b(shuffled.begin() + na, shuffled.end());
    const auto va = group_metric(a);
    const auto vb = group_metric(b);
    if (!va || !vb) {
      undefined[i] = 1;
      extreme[i] = 1;
      return;
    }
    if (std::abs(*va - *vb) >= threshold) extreme[i] = 1;
  });
  int count = 0;
  for (int i = 0; i < cfg.permutations; ++i) {
    count += extreme[i];
    out.undefined_permutations += undefined[i];
  }
  out.p_value = (1.0 + count) / (1.0 + cfg.permutations);
  return out;
}

// Unweighted (or weighted) arithmetic mean.
inline double macro_average(std::span<const double> values,
                            std::span<const double> weights = {}) {
  if (values.empty()) throw ValidationError("macro_average: empty input");
  if (!weights.empty() && weights.size() != values.size()) {
    throw ValidationError("macro_average: weights size mismatch");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    num += w * values[i];
    den += w;
  }
  if (den == 0.0) throw ValidationError("macro_average: zero total weight");
  return num / den;
}

}  // namespace ordmet
