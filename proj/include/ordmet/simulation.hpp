#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ordmet/aggregate.hpp"
#include "ordmet/baselines.hpp"
#include "ordmet/inference.hpp"
#include "ordmet/ratings.hpp"
#include "ordmet/reference.hpp"
#include "ordmet/responsiveness.hpp"
#include "ordmet/rng.hpp"

namespace ordmet {

// Generative study configuration. Severities and rater tendencies are
// normally distributed; trained raters binarize the latent severity at a
// personal percentile drawn from a truncated normal on [50, 90].
struct SimulationConfig {
  int n_items = 1000;
  int n_crowd = 30;
  int n_trained = 30;
  int k_max = 4;
  double sigma_b = 0.5;               // sd of rater tendencies
  double shift_proportion = 0.55;     // share of scores in 2..K shifted down
  double conservative_quantile = 0.7; // cutoff for the conservative pattern
  double trained_percentile_mean = 70.0;
  double trained_percentile_sd = 1.5;
  double trained_percentile_lo = 50.0;
  double trained_percentile_hi = 90.0;
  double perception_noise_sd = 0.0;   // per-rating jitter on perceived severity
  int bootstrap_trials = 100;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_items < 1 || n_crowd < 1 || n_trained < 1) {
      throw ValidationError("simulation sizes must be positive");
    }
    if (k_max < 1) throw ValidationError("k_max must be >= 1");
    if (sigma_b < 0.0 || perception_noise_sd < 0.0) {
      throw ValidationError("spreads must be non-negative");
    }
    if (shift_proportion < 0.0 || shift_proportion > 1.0) {
      throw ValidationError("shift_proportion must be in [0, 1]");
    }
    if (!(conservative_quantile > 0.0 && conservative_quantile < 1.0)) {
      throw ValidationError("conservative_quantile must be in (0, 1)");
    }
    if (!(trained_percentile_lo < trained_percentile_hi) || trained_percentile_lo <= 0.0 ||
        trained_percentile_hi >= 100.0) {
      throw ValidationError("trained percentile range must satisfy 0 < lo < hi < 100");
    }
  }
};

struct SimulatedItem {
  std::string item_id;
  double severity = 0.0;  // latent severity
};

// A crowd rater: additive tendency plus ascending response thresholds.
// The perceived severity of an item is severity + tendency (+ jitter), and
// the score is the number of thresholds strictly below it, which makes the
// response a non-decreasing step function by construction.
struct SimulatedRater {
  std::string rater_id;
  double tendency = 0.0;
  std::vector<double> thresholds;  // strictly ascending, length k_max

  int score_of(double perceived) const {
    int s = 0;
    for (double t : thresholds) {
      if (t < perceived) ++s;
      else break;
    }
    return s;
  }
};

struct TrainedRater {
  std::string rater_id;
  double percentile = 70.0;  // items with severity in the bottom p% get label 0
};

struct World {
  SimulationConfig cfg;
  std::vector<SimulatedItem> items;
  std::vector<SimulatedRater> crowd;
  std::vector<TrainedRater> trained;
};

enum class ScoringPattern { normal, downward_shift, conservative };

inline const char* to_string(ScoringPattern p) {
  switch (p) {
    case ScoringPattern::normal: return "normal";
    case ScoringPattern::downward_shift: return "downward_shift";
    case ScoringPattern::conservative: return "conservative";
  }
  return "?";
}

namespace detail {

inline std::string padded_id(const char* prefix, int i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, i + 1);
  return buf;
}

// Marginal sd of perceived severity: severity N(0,1) plus optional jitter.
inline double perceived_sd(const SimulationConfig& cfg) {
  return std::sqrt(1.0 + cfg.perception_noise_sd * cfg.perception_noise_sd);
}

inline double jitter(const SimulationConfig& cfg, const SimulatedRater& rater, int item_idx) {
  if (cfg.perception_noise_sd == 0.0) return 0.0;
  KeyedRng rng = KeyedRng(cfg.seed).child("noise").child(fnv1a64(rater.rater_id),
                                                         static_cast<std::uint64_t>(item_idx));
  return rng.normal(0.0, cfg.perception_noise_sd);
}

}  // namespace detail

// Draws items, crowd raters and trained raters from generators keyed by the
// seed. Crowd thresholds are the equal-probability quantiles of the rater's
// own marginal of perceived severity, so each rater's score distribution is
// uniform over 0..K under the normal pattern.
inline World generate_world(const SimulationConfig& cfg) {
  cfg.validate();
  World w;
  w.cfg = cfg;
  KeyedRng root(cfg.seed);

  KeyedRng item_rng = root.child("items");
  w.items.reserve(cfg.n_items);
  for (int i = 0; i < cfg.n_items; ++i) {
    w.items.push_back({detail::padded_id("i", i, 5), item_rng.normal()});
  }

  const double msd = detail::perceived_sd(cfg);
  w.crowd.reserve(cfg.n_crowd);
  for (int j = 0; j < cfg.n_crowd; ++j) {
    SimulatedRater r;
    r.rater_id = detail::padded_id("c", j, 3);
    KeyedRng rng = root.child("crowd", static_cast<std::uint64_t>(j));
    r.tendency = cfg.sigma_b > 0.0 ? rng.normal(0.0, cfg.sigma_b) : 0.0;
    r.thresholds.reserve(cfg.k_max);
    for (int k = 1; k <= cfg.k_max; ++k) {
      const double q = static_cast<double>(k) / static_cast<double>(cfg.k_max + 1);
      r.thresholds.push_back(r.tendency + msd * inverse_normal_cdf(q));
    }
    w.crowd.push_back(std::move(r));
  }

  w.trained.reserve(cfg.n_trained);
  for (int j = 0; j < cfg.n_trained; ++j) {
    TrainedRater t;
    t.rater_id = detail::padded_id("t", j, 3);
    KeyedRng rng = root.child("trained", static_cast<std::uint64_t>(j));
    t.percentile = rng.truncated_normal(cfg.trained_percentile_mean, cfg.trained_percentile_sd,
                                        cfg.trained_percentile_lo, cfg.trained_percentile_hi);
    w.trained.push_back(std::move(t));
  }
  return w;
}

// Normal pattern: quantile-threshold scoring of perceived severity.
inline std::vector<int> score_normal(const World& w, const SimulatedRater& rater) {
  std::vector<int> scores(w.items.size());
  for (std::size_t i = 0; i < w.items.size(); ++i) {
    const double perceived = w.items[i].severity + rater.tendency +
                             detail::jitter(w.cfg, rater, static_cast<int>(i));
    scores[i] = rater.score_of(perceived);
  }
  return scores;
}

// Downward-shift pattern: each score in 2..K is moved, independently with
// probability shift_proportion, to a uniformly drawn lower score in
// ceil(s/4)..s-1 (never below 1). Draws are keyed per (rater, item). Cell 0
// is untouched and cell K loses the shifted share of its mass.
inline std::vector<int> apply_downward_shift(const World& w, const SimulatedRater& rater,
                                             std::vector<int> scores) {
  const double q = w.cfg.shift_proportion;
  if (q == 0.0) return scores;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int s = scores[i];
    if (s < 2) continue;
    KeyedRng rng = KeyedRng(w.cfg.seed).child("shift").child(
        fnv1a64(rater.rater_id), static_cast<std::uint64_t>(i));
    if (rng.uniform01() < q) {
      const int lo = std::max(1, (s + 3) / 4);
      scores[i] = lo + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(s - lo)));
    }
  }
  return scores;
}

// Conservative pattern: items whose perceived severity exceeds the
// conservative_quantile of the rater's marginal get a uniformly random score
// in 1..K; everything else gets 0.
inline std::vector<int> apply_conservative(const World& w, const SimulatedRater& rater) {
  const double cutoff =
      rater.tendency + detail::perceived_sd(w.cfg) * inverse_normal_cdf(w.cfg.conservative_quantile);
  std::vector<int> scores(w.items.size());
  for (std::size_t i = 0; i < w.items.size(); ++i) {
    const double perceived = w.items[i].severity + rater.tendency +
                             detail::jitter(w.cfg, rater, static_cast<int>(i));
    if (perceived > cutoff) {
      KeyedRng rng = KeyedRng(w.cfg.seed).child("conservative").child(
          fnv1a64(rater.rater_id), static_cast<std::uint64_t>(i));
      scores[i] = 1 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(w.cfg.k_max)));
    } else {
      scores[i] = 0;
    }
  }
  return scores;
}

inline std::vector<int> score_pattern(const World& w, const SimulatedRater& rater,
                                      ScoringPattern pattern) {
  switch (pattern) {
    case ScoringPattern::normal:
      return score_normal(w, rater);
    case ScoringPattern::downward_shift:
      return apply_downward_shift(w, rater, score_normal(w, rater));
    case ScoringPattern::conservative:
      return apply_conservative(w, rater);
  }
  throw std::logic_error("unknown pattern");
}

// Each trained rater labels an item 1 iff its severity lies above the
// rater's personal percentile of the generated severity sample
// (nearest-rank convention, no interpolation).
inline std::vector<BinaryRecord> trained_reference(const World& w) {
  std::vector<double> sorted;
  sorted.reserve(w.items.size());
  for (const auto& it : w.items) sorted.push_back(it.severity);
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();

  std::vector<BinaryRecord> out;
  out.reserve(w.items.size() * w.trained.size());
  for (const auto& t : w.trained) {
    const auto rank = static_cast<std::size_t>(
        std::ceil(t.percentile / 100.0 * static_cast<double>(n)));
    const double threshold = sorted[std::min(n - 1, std::max<std::size_t>(rank, 1) - 1)];
    for (const auto& it : w.items) {
      out.push_back({it.item_id, t.rater_id, it.severity > threshold ? 1 : 0});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline RatingTable pattern_table(const World& w, ScoringPattern pattern) {
  std::vector<RatingRecord> records;
  records.reserve(w.items.size() * w.crowd.size());
  for (const auto& rater : w.crowd) {
    const auto scores = score_pattern(w, rater, pattern);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      records.push_back({w.items[i].item_id, rater.rater_id, scores[i]});
    }
  }
  return RatingTable(LikertScale(w.cfg.k_max), std::move(records));
}

struct RaterMetrics {
  std::string rater_id;
  double mpa = 0.0;
  double wra = 0.0;
  double hm = 0.0;
  std::optional<double> tau_b;
  std::optional<double> tau_a;
  std::optional<double> spearman_rho;
  std::optional<double> auroc;
  std::optional<double> aucpr;
  std::int64_t pair_count = 0;
};

struct ScenarioSummary {
  ScoringPattern pattern = ScoringPattern::normal;
  std::vector<RaterMetrics> per_rater;
  std::map<std::string, double> mean;                 // metric name -> mean over raters
  std::map<std::string, IntervalResult> mean_ci;      // rater-level bootstrap
};

struct ScenarioStudy {
  SimulationConfig cfg;
  std::vector<ScenarioSummary> scenarios;
};

namespace detail {

inline RaterMetrics rater_metrics_for(const World& w, const SimulatedRater& rater,
                                      ScoringPattern pattern,
                                      const std::vector<BinaryRecord>& binary) {
  const auto scores = score_pattern(w, rater, pattern);
  GroupScoreTable unit;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    unit.entries[w.items[i].item_id] = {scores[i], 1};
  }
  const auto pairs = guideline_pairs(unit, binary, LikertScale(w.cfg.k_max), rater.rater_id);
  const auto c = confusion(pairs);
  const auto m = mpa(c);
  const auto wr = wra(c);
  RaterMetrics out;
  out.rater_id = rater.rater_id;
  out.mpa = m.value;
  out.wra = wr.value;
  out.hm = harmonic_mean(m.value, wr.value);
  const auto base = baselines(pairs);
  out.tau_b = base.tau_b;
  out.tau_a = base.tau_a;
  out.spearman_rho = base.spearman_rho;
  out.auroc = base.auroc;
  out.aucpr = base.aucpr;
  out.pair_count = static_cast<std::int64_t>(pairs.pairs.size());
  return out;
}

inline double metric_field(const RaterMetrics& r, const std::string& name) {
  if (name == "mpa") return r.mpa;
  if (name == "wra") return r.wra;
  if (name == "hm") return r.hm;
  if (name == "tau_b") return r.tau_b.value_or(0.0);
  if (name == "tau_a") return r.tau_a.value_or(0.0);
  if (name == "spearman_rho") return r.spearman_rho.value_or(0.0);
  if (name == "auroc") return r.auroc.value_or(0.0);
  if (name == "aucpr") return r.aucpr.value_or(0.0);
  throw std::logic_error("unknown metric " + name);
}

}  // namespace detail

inline const std::vector<std::string>& scenario_metric_names() {
  static const std::vector<std::string> names{"mpa",   "wra",          "hm",    "tau_b",
                                              "tau_a", "spearman_rho", "auroc", "aucpr"};
  return names;
}

// Full comparison study: every crowd rater is evaluated against the trained
// panel under all three scoring patterns. Means over raters get percentile
// bootstrap intervals from rater-level resampling.
inline ScenarioStudy run_scenarios(const SimulationConfig& cfg, int workers = 1) {
  const World w = generate_world(cfg);
  const auto binary = trained_reference(w);
  ScenarioStudy study;
  study.cfg = cfg;
  for (ScoringPattern pattern : {ScoringPattern::normal, ScoringPattern::downward_shift,
                                 ScoringPattern::conservative}) {
    ScenarioSummary summary;
    summary.pattern = pattern;
    summary.per_rater.resize(w.crowd.size());
    parallel_for(w.crowd.size(), workers, [&](std::size_t j) {
      summary.per_rater[j] = detail::rater_metrics_for(w, w.crowd[j], pattern, binary);
    });
    const auto n = summary.per_rater.size();
    for (const auto& name : scenario_metric_names()) {
      std::vector<double> values(n);
      for (std::size_t j = 0; j < n; ++j) {
        values[j] = detail::metric_field(summary.per_rater[j], name);
      }
      const double mean = macro_average(values);
      summary.mean[name] = mean;

      IntervalResult ci;
      ci.point = mean;
      ci.trials = cfg.bootstrap_trials;
      std::vector<double> means(cfg.bootstrap_trials);
      KeyedRng base = KeyedRng(cfg.seed)
                          .child("scenario-ci")
                          .child(fnv1a64(name), static_cast<std::uint64_t>(pattern));
      for (int trial = 0; trial < cfg.bootstrap_trials; ++trial) {
        KeyedRng rng = base.child(static_cast<std::uint64_t>(trial));
        double acc = 0.0;
        for (std::size_t d = 0; d < n; ++d) acc += values[rng.uniform_below(n)];
        means[trial] = acc / static_cast<double>(n);
      }
      std::sort(means.begin(), means.end());
      ci.lo = detail::percentile(means, 0.025);
      ci.hi = detail::percentile(means, 0.975);
      summary.mean_ci[name] = ci;
    }
    study.scenarios.push_back(std::move(summary));
  }
  return study;
}

}  // namespace ordmet
