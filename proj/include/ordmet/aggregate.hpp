#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ordmet/ratings.hpp"
#include "ordmet/rng.hpp"

namespace ordmet {

enum class AggregationKind { plurality, median, mean };

inline const char* to_string(AggregationKind k) {
  switch (k) {
    case AggregationKind::plurality: return "plurality";
    case AggregationKind::median: return "median";
    case AggregationKind::mean: return "mean";
  }
  return "?";
}

struct AggregationPolicy {
  AggregationKind kind = AggregationKind::plurality;
  std::uint64_t seed = 0;
};

// One ordinal score per item plus the number of ratings that produced it.
struct GroupScoreTable {
  std::map<std::string, std::pair<int, int>> entries;  // item -> (score, support)

  bool contains(const std::string& item) const { return entries.contains(item); }
  int score(const std::string& item) const { return entries.at(item).first; }
  std::size_t size() const { return entries.size(); }
};

namespace detail {

// Plurality with a reproducible draw among tied modes. The draw is keyed by
// (seed, item id), so it is independent of iteration order, platform and of
// every other item's outcome.
inline int plurality_score(const std::vector<int>& scores, const LikertScale& scale,
                           std::uint64_t seed, const std::string& item_id) {
  std::vector<int> counts(scale.levels(), 0);
  for (int s : scores) counts[s]++;
  int best = 0;
  for (int c : counts) best = std::max(best, c);
  std::vector<int> modes;
  for (int s = 0; s < scale.levels(); ++s) {
    if (counts[s] == best) modes.push_back(s);
  }
  if (modes.size() == 1) return modes[0];
  KeyedRng rng = KeyedRng(seed).child("plurality-tie").child(fnv1a64(item_id));
  return modes[rng.uniform_below(modes.size())];
}

inline int lower_median(std::vector<int> scores) {
  std::sort(scores.begin(), scores.end());
  return scores[(scores.size() - 1) / 2];
}

inline int rounded_mean(const std::vector<int>& scores) {
  double sum = 0;
  for (int s : scores) sum += s;
  return static_cast<int>(std::floor(sum / static_cast<double>(scores.size()) + 0.5));
}

}  // namespace detail

// Collapses the selected raters' scores per item into one group score.
// Items with no rating from the selected raters are omitted. Pure function
// of (table contents, rater set, policy); safe to call concurrently.
inline GroupScoreTable aggregate(const RatingTable& table, const std::set<std::string>& raters,
                                 const AggregationPolicy& policy) {
  if (raters.empty()) throw ValidationError("aggregate: empty rater set");
  std::map<std::string, std::vector<int>> per_item;
  for (const auto& rec : table.records()) {
    if (raters.contains(rec.rater_id)) per_item[rec.item_id].push_back(rec.score);
  }
  GroupScoreTable out;
  for (auto& [item, scores] : per_item) {
    int s = 0;
    switch (policy.kind) {
      case AggregationKind::plurality:
        s = detail::plurality_score(scores, table.scale(), policy.seed, item);
        break;
      case AggregationKind::median:
        s = detail::lower_median(scores);
        break;
      case AggregationKind::mean:
        s = detail::rounded_mean(scores);
        break;
    }
    out.entries[item] = {s, static_cast<int>(scores.size())};
  }
  return out;
}

inline void save_group_scores(std::ostream& os, const GroupScoreTable& t) {
  os << "item_id,score,support\n";
  for (const auto& [item, entry] : t.entries) {
    csv::write_line(os, {item, std::to_string(entry.first), std::to_string(entry.second)});
  }
}

}  // namespace ordmet
