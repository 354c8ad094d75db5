#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ordmet/aggregate.hpp"
#include "ordmet/ratings.hpp"

namespace ordmet {

// One (score, binary reference) instance for the evaluated unit.
struct ReferencePair {
  std::string item_id;
  int s = 0;  // evaluated unit's ordinal score
  int u = 0;  // binary reference instance

  auto operator<=>(const ReferencePair&) const = default;
};

enum class ReferenceKind { guideline, crowd };

inline const char* to_string(ReferenceKind k) {
  return k == ReferenceKind::guideline ? "guideline" : "crowd";
}

// Cut point used to binarize crowd scores; valid values are 1..k_max.
struct Boundary {
  int t = 1;

  Boundary() = default;
  Boundary(int value, const LikertScale& scale) : t(value) {
    if (t < 1 || t > scale.k_max) {
      throw ValidationError("boundary must be in [1, " + std::to_string(scale.k_max) + "]");
    }
  }
};

struct ReferencePairSet {
  LikertScale scale{1};
  std::vector<ReferencePair> pairs;
  ReferenceKind reference_kind = ReferenceKind::guideline;
  std::optional<int> boundary;  // present iff reference_kind == crowd
  std::string evaluated_unit;
  int dropped_items = 0;  // unit-scored items with no reference rating
};

// All boundaries {1, ..., k_max} in ascending order.
inline std::vector<Boundary> all_boundaries(const LikertScale& scale) {
  std::vector<Boundary> out;
  out.reserve(scale.k_max);
  for (int t = 1; t <= scale.k_max; ++t) out.push_back(Boundary(t, scale));
  return out;
}

// Pairs the unit's score on each shared item with every individual binary
// rating on that item, one pair per rating. An item with five binary
// ratings contributes five pairs sharing the same s. With
// collapse_majority, each item instead contributes a single pair whose u is
// the strict majority label (items with a tied panel are dropped).
inline ReferencePairSet guideline_pairs(const GroupScoreTable& group_scores,
                                        const std::vector<BinaryRecord>& binary,
                                        const LikertScale& scale,
                                        const std::string& evaluated_unit = "",
                                        bool collapse_majority = false) {
  std::map<std::string, std::vector<int>> labels_by_item;
  for (const auto& rec : binary) {
    if (group_scores.contains(rec.item_id)) labels_by_item[rec.item_id].push_back(rec.label);
  }
  ReferencePairSet out;
  out.scale = scale;
  out.reference_kind = ReferenceKind::guideline;
  out.evaluated_unit = evaluated_unit;
  for (const auto& [item, entry] : group_scores.entries) {
    auto it = labels_by_item.find(item);
    if (it == labels_by_item.end()) {
      out.dropped_items++;
      continue;
    }
    const int s = entry.first;
    if (collapse_majority) {
      int ones = 0;
      for (int l : it->second) ones += l;
      const int zeros = static_cast<int>(it->second.size()) - ones;
      if (ones == zeros) {
        out.dropped_items++;  // no strict majority
        continue;
      }
      out.pairs.push_back({item, s, ones > zeros ? 1 : 0});
    } else {
      for (int l : it->second) out.pairs.push_back({item, s, l});
    }
  }
  if (out.pairs.empty()) {
    throw ValidationError("guideline reference: no shared items between unit scores and binary ratings");
  }
  return out;
}

// Crowd-based reference at boundary t. For every item the unit scored, each
// rating by a rater outside the evaluated set is binarized as u = 1 iff
// rating >= t. The evaluated raters are excluded so the reference never
// depends on the unit's own ratings. With aggregate_reference, the
// individual binarized ratings per item are collapsed by strict majority
// (ties dropped).
inline ReferencePairSet crowd_pairs(const RatingTable& table,
                                    const std::set<std::string>& evaluated_raters,
                                    const GroupScoreTable& unit_scores, Boundary t,
                                    const std::string& evaluated_unit = "",
                                    bool aggregate_reference = false) {
  bool any_outside = false;
  for (const auto& r : table.rater_ids()) {
    if (!evaluated_raters.contains(r)) {
      any_outside = true;
      break;
    }
  }
  if (!any_outside) throw ValidationError("crowd reference: empty reference population");

  ReferencePairSet out;
  out.scale = table.scale();
  out.reference_kind = ReferenceKind::crowd;
  out.boundary = t.t;
  out.evaluated_unit = evaluated_unit;
  for (const auto& [item, entry] : unit_scores.entries) {
    const int s = entry.first;
    int ones = 0, zeros = 0;
    for (const auto& rec : table.item_ratings(item)) {
      if (evaluated_raters.contains(rec.rater_id)) continue;
      const int u = rec.score >= t.t ? 1 : 0;
      if (aggregate_reference) {
        (u ? ones : zeros)++;
      } else {
        out.pairs.push_back({item, s, u});
      }
    }
    if (aggregate_reference && ones != zeros && ones + zeros > 0) {
      out.pairs.push_back({item, s, ones > zeros ? 1 : 0});
    }
  }
  // items the unit scored but that gained no pair (no reference rating, or a tied panel)
  std::set<std::string> covered;
  for (const auto& p : out.pairs) covered.insert(p.item_id);
  out.dropped_items = static_cast<int>(unit_scores.size()) - static_cast<int>(covered.size());
  if (out.pairs.empty()) {
    throw ValidationError("crowd reference: no reference ratings on the unit's items");
  }
  return out;
}

// Per-item mean score of the raters outside the excluded set. This is the
// rest score used by the scalability baseline.
inline std::map<std::string, double> rest_scores(const RatingTable& table,
                                                 const std::set<std::string>& excluded_raters) {
  std::map<std::string, double> out;
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& rec : table.records()) {
    if (excluded_raters.contains(rec.rater_id)) continue;
    auto& [sum, n] = acc[rec.item_id];
    sum += rec.score;
    n += 1;
  }
  for (const auto& [item, sn] : acc) out[item] = sn.first / sn.second;
  return out;
}

inline void save_pairs(std::ostream& os, const ReferencePairSet& set) {
  os << "item_id,s,u\n";
  for (const auto& p : set.pairs) {
    csv::write_line(os, {p.item_id, std::to_string(p.s), std::to_string(p.u)});
  }
}

}  // namespace ordmet
