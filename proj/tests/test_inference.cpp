#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ordmet/baselines.hpp"
#include "ordmet/inference.hpp"
#include "ordmet/simulation.hpp"
#include "test_util.hpp"

using namespace ordmet;

namespace {

std::optional<double> wra_kernel(const ReferencePairSet& p) {
  return wra(confusion(p)).value;
}

std::optional<double> hm_kernel(const ReferencePairSet& p) {
  const auto c = confusion(p);
  return harmonic_mean(mpa(c).value, wra(c).value);
}

}  // namespace

TEST_CASE("macro_average: mean, weights, errors") {
  const std::vector<double> one{0.7};
  CHECK(macro_average(one) == 0.7);
  const std::vector<double> two{0.2, 0.4};
  CHECK(macro_average(two) == doctest::Approx(0.3).epsilon(1e-15));
  const std::vector<double> v{1.0, 3.0};
  const std::vector<double> w{3.0, 1.0};
  CHECK(macro_average(v, w) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK_THROWS_AS(macro_average(std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(macro_average(two, one), ValidationError);
}

TEST_CASE("bootstrap interval on identical items collapses to a point") {
  // every item contributes the same pairs, so every resample is identical
  auto set = testutil::make_pairs(1, {0, 0}, {0, 0});
  for (int i = 0; i < 10; ++i) {
    set.pairs.push_back({"i" + std::to_string(i), 0, 0});
    set.pairs.push_back({"i" + std::to_string(i), 1, 1});
  }
  ResampleConfig cfg;
  cfg.seed = 5;
  const auto iv = bootstrap_ci(wra_kernel, set, cfg);
  CHECK(iv.defined());
  CHECK(*iv.lo == iv.point);
  CHECK(*iv.hi == iv.point);
}

TEST_CASE("point estimate is unaffected by the trial count") {
  std::mt19937_64 rng(1);
  const auto pairs = testutil::random_pairs(rng, 4, 120);
  ResampleConfig a, b;
  a.bootstrap_trials = 50;
  b.bootstrap_trials = 100;
  a.seed = b.seed = 9;
  CHECK(bootstrap_ci(wra_kernel, pairs, a).point == bootstrap_ci(wra_kernel, pairs, b).point);
}

TEST_CASE("bootstrap is bit-exact across worker counts and repeats") {
  std::mt19937_64 rng(2);
  const auto pairs = testutil::random_pairs(rng, 4, 200);
  ResampleConfig cfg;
  cfg.seed = 1234;
  const auto a = bootstrap_ci(hm_kernel, pairs, cfg, 1);
  const auto b = bootstrap_ci(hm_kernel, pairs, cfg, 8);
  const auto c = bootstrap_ci(hm_kernel, pairs, cfg, 8);
  CHECK(a.point == b.point);
  CHECK(*a.lo == *b.lo);
  CHECK(*a.hi == *b.hi);
  CHECK(*b.lo == *c.lo);
  CHECK(*b.hi == *c.hi);
}

TEST_CASE("resampling is grouped by item") {
  // a replica built from a seed must not change when an item it never
  // sampled disappears from the source set
  std::mt19937_64 rng(3);
  auto pairs = testutil::random_pairs(rng, 4, 60);  // items i0..i59, one pair each
  const auto groups = detail::group_pairs_by_item(pairs);
  KeyedRng trial_rng = detail::bootstrap_trial_rng(777, 0);
  const auto replica = detail::resample_items(pairs, groups, trial_rng);
  // all pairs of a sampled item enter together: counts per item are multiples
  std::map<std::string, int> counts;
  for (const auto& p : replica.pairs) counts[p.item_id]++;
  std::set<std::string> sampled;
  for (const auto& [item, n] : counts) sampled.insert(item);
  // find an unsampled item and drop it from the source
  std::string unsampled;
  for (const auto& item : groups.items) {
    if (!sampled.contains(item)) {
      unsampled = item;
      break;
    }
  }
  REQUIRE(!unsampled.empty());
  ReferencePairSet reduced = pairs;
  std::erase_if(reduced.pairs, [&](const ReferencePair& p) { return p.item_id == unsampled; });
  // recompute with the same trial seed over the same *item multiset* minus
  // the unsampled one: metric on the original replica must not involve it
  const auto c = confusion(replica);
  for (const auto& p : replica.pairs) CHECK(p.item_id != unsampled);
  CHECK(c.total() == static_cast<std::int64_t>(replica.pairs.size()));
}

TEST_CASE("an item's pairs always enter a replica together") {
  std::mt19937_64 rng(4);
  auto pairs = testutil::make_pairs(4, {2, 2, 2, 2, 2}, {2, 2, 2, 2, 2}, 4);  // 4 pairs per item
  const auto groups = detail::group_pairs_by_item(pairs);
  std::map<std::string, int> source_counts;
  for (const auto& p : pairs.pairs) source_counts[p.item_id]++;
  KeyedRng trial_rng = detail::bootstrap_trial_rng(31, 7);
  const auto replica = detail::resample_items(pairs, groups, trial_rng);
  std::map<std::string, int> counts;
  for (const auto& p : replica.pairs) counts[p.item_id]++;
  for (const auto& [item, n] : counts) {
    CHECK(n % source_counts.at(item) == 0);
  }
}

TEST_CASE("undefined-heavy metrics yield an undefined interval with diagnostics") {
  std::mt19937_64 rng(5);
  const auto pairs = testutil::random_pairs(rng, 4, 40);
  ResampleConfig cfg;
  cfg.bootstrap_trials = 20;
  cfg.seed = 6;
  int calls = 0;
  const auto flaky = [&calls](const ReferencePairSet& p) -> std::optional<double> {
    ++calls;
    if (calls > 1) return std::nullopt;  // point works, every trial fails
    return wra_kernel(p);
  };
  const auto iv = bootstrap_ci(flaky, pairs, cfg);
  CHECK(!iv.defined());
  CHECK(iv.undefined_trials == 20);
}

TEST_CASE("simulated guideline pairs give a narrow hm interval at 1000 items") {
  SimulationConfig sim;
  sim.seed = 21;
  const auto w = generate_world(sim);
  const auto binary = trained_reference(w);
  const auto scores = score_normal(w, w.crowd[0]);
  GroupScoreTable unit;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    unit.entries[w.items[i].item_id] = {scores[i], 1};
  }
  const auto pairs = guideline_pairs(unit, binary, LikertScale(sim.k_max), "c001");
  ResampleConfig cfg;
  cfg.seed = 8;
  const auto iv = bootstrap_ci(hm_kernel, pairs, cfg);
  REQUIRE(iv.defined());
  CHECK(*iv.hi - *iv.lo <= 0.05);
  CHECK(*iv.lo <= iv.point);
  CHECK(iv.point <= *iv.hi);
}

TEST_CASE("permutation test: relabeled copy of a group gives p = 1") {
  // metric ignores labels entirely -> observed diff 0, no permuted diff exceeds
  const auto metric = [](const std::set<std::string>&) -> std::optional<double> {
    return 0.5;
  };
  ResampleConfig cfg;
  cfg.permutations = 99;
  cfg.seed = 3;
  const auto r = permutation_test(metric, {"a1", "a2", "a3"}, {"b1", "b2", "b3"}, cfg);
  CHECK(r.observed_diff == 0.0);
  CHECK(r.p_value == 1.0);
}

TEST_CASE("permutation p-value is never zero and groups must be disjoint") {
  const auto metric = [](const std::set<std::string>& g) -> std::optional<double> {
    return g.contains("a1") ? 1.0 : 0.0;
  };
  ResampleConfig cfg;
  cfg.permutations = 50;
  cfg.seed = 4;
  const auto r = permutation_test(metric, {"a1"}, {"b1"}, cfg);
  CHECK(r.p_value > 0.0);
  CHECK_THROWS_AS(permutation_test(metric, {"a1"}, {"a1", "b1"}, cfg), ValidationError);
  CHECK_THROWS_AS(permutation_test(metric, {}, {"b1"}, cfg), ValidationError);
}

TEST_CASE("permutation test is bit-exact across worker counts") {
  const auto metric = [](const std::set<std::string>& g) -> std::optional<double> {
    double acc = 0;
    for (const auto& r : g) acc += static_cast<double>(fnv1a64(r) % 1000);
    return acc / g.size();
  };
  std::set<std::string> a, b;
  for (int i = 0; i < 8; ++i) {
    a.insert("a" + std::to_string(i));
    b.insert("b" + std::to_string(i));
  }
  ResampleConfig cfg;
  cfg.permutations = 300;
  cfg.seed = 77;
  const auto r1 = permutation_test(metric, a, b, cfg, 1);
  const auto r8 = permutation_test(metric, a, b, cfg, 8);
  CHECK(r1.p_value == r8.p_value);
  CHECK(r1.observed_diff == r8.observed_diff);
}
