#pragma once

#include <random>
#include <string>
#include <vector>

#include "ordmet/reference.hpp"

namespace testutil {

// Pair set with the given per-score (ones, zeros) tallies; every pair gets
// its own item id unless pairs_per_item > 1.
inline ordmet::ReferencePairSet make_pairs(int k_max, const std::vector<int>& ones,
                                           const std::vector<int>& zeros,
                                           int pairs_per_item = 1) {
  ordmet::ReferencePairSet set;
  set.scale = ordmet::LikertScale(k_max);
  set.evaluated_unit = "test";
  int item = 0, in_item = 0;
  const auto next_item = [&] {
    if (++in_item >= pairs_per_item) {
      in_item = 0;
      ++item;
    }
  };
  for (int s = 0; s <= k_max; ++s) {
    for (int c = 0; c < ones[s]; ++c) {
      set.pairs.push_back({"i" + std::to_string(item), s, 1});
      next_item();
    }
    for (int c = 0; c < zeros[s]; ++c) {
      set.pairs.push_back({"i" + std::to_string(item), s, 0});
      next_item();
    }
  }
  return set;
}

// The 20-pair worked fixture: counts (4,4,4,4,4), ones (1,1,2,3,4).
inline ordmet::ReferencePairSet worked_fixture() {
  return make_pairs(4, {1, 1, 2, 3, 4}, {3, 3, 2, 1, 0});
}

// Random pair set for fuzzing; may leave scores unused.
inline ordmet::ReferencePairSet random_pairs(std::mt19937_64& rng, int k_max, int n) {
  std::uniform_int_distribution<int> score(0, k_max);
  std::bernoulli_distribution skip_score(0.2);
  std::vector<bool> used(k_max + 1, true);
  for (int s = 0; s <= k_max; ++s) used[s] = !skip_score(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ordmet::ReferencePairSet set;
  set.scale = ordmet::LikertScale(k_max);
  set.evaluated_unit = "fuzz";
  for (int i = 0; i < n; ++i) {
    int s = score(rng);
    if (!used[s]) s = 0;
    const double p_one = 0.1 + 0.8 * s / k_max;
    set.pairs.push_back({"i" + std::to_string(i), s, unit(rng) < p_one ? 1 : 0});
  }
  return set;
}

}  // namespace testutil
