#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ordmet/responsiveness.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace ordmet;

TEST_CASE("confusion tabulates per-score counts") {
  const auto pairs = testutil::make_pairs(1, {1, 1}, {1, 0});
  const auto c = confusion(pairs);
  CHECK(c.n[0] == 2);
  CHECK(c.n1[0] == 1);
  CHECK(c.n[1] == 1);
  CHECK(c.n1[1] == 1);
  CHECK(c.u1() == 2);
  CHECK(c.u0() == 1);
}

TEST_CASE("confusion of the worked fixture") {
  const auto c = confusion(testutil::worked_fixture());
  for (int s = 0; s <= 4; ++s) CHECK(c.n[s] == 4);
  CHECK(c.n1[0] == 1);
  CHECK(c.n1[1] == 1);
  CHECK(c.n1[2] == 2);
  CHECK(c.n1[3] == 3);
  CHECK(c.n1[4] == 4);
}

TEST_CASE("confusion with all-positive reference has u0 == 0") {
  const auto c = confusion(testutil::make_pairs(2, {2, 0, 1}, {0, 0, 0}));
  CHECK(c.u0() == 0);
  CHECK(c.u1() == 3);
}

TEST_CASE("confusion rejects an empty pair set") {
  ReferencePairSet empty;
  empty.scale = LikertScale(4);
  CHECK_THROWS_AS(confusion(empty), ValidationError);
}

TEST_CASE("precision_at: defined, zero and unused") {
  const auto c = confusion(testutil::make_pairs(2, {3, 0, 0}, {1, 0, 4}));
  CHECK(*precision_at(c, 0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(!precision_at(c, 1).has_value());
  CHECK(*precision_at(c, 2) == 0.0);
}

TEST_CASE("mpa on the worked fixture matches the frozen hand computation") {
  const auto c = confusion(testutil::worked_fixture());
  const auto r = mpa(c);
  // precision (0.25, 0.25, 0.5, 0.75, 1.0) -> curve (0, 0, 0.5, 1.25, 2.25, 0)
  CHECK(*r.curve.ys[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(*r.curve.ys[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(*r.curve.ys[2] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(*r.curve.ys[3] == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(*r.curve.ys[4] == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(*r.curve.ys[5] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.value == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("mpa extremes: balanced step is 1, anti-monotone caps at 0") {
  // precision 0 on the lower half, 1 on the upper half, all scores used
  const auto perfect = confusion(testutil::make_pairs(4, {0, 0, 0, 2, 2}, {2, 2, 2, 0, 0}));
  CHECK(mpa(perfect).value == 1.0);
  const auto reversed = confusion(testutil::make_pairs(4, {2, 2, 0, 0, 0}, {0, 0, 2, 2, 2}));
  CHECK(mpa(reversed).value == 0.0);
}

TEST_CASE("mpa ignores unused scores in the running max") {
  // only scores 0 and 4 used; single defined prior precision
  const auto pairs = testutil::make_pairs(4, {0, 0, 0, 0, 3}, {3, 0, 0, 0, 1});
  const auto r = mpa(confusion(pairs));
  CHECK(*r.curve.ys[1] == 0.0);
  CHECK(*r.curve.ys[2] == 0.0);
  CHECK(*r.curve.ys[3] == 0.0);
  CHECK(*r.curve.ys[4] == doctest::Approx(0.75).epsilon(1e-12));
  const auto o = oracle::mpa_wra(pairs);
  CHECK(r.value == doctest::Approx(std::max(0.0, o.mpa_uncapped)).epsilon(1e-12));
}

TEST_CASE("wra on the worked fixture matches the frozen hand computation") {
  const auto c = confusion(testutil::worked_fixture());
  const auto r = wra(c);
  CHECK(r.value == doctest::Approx(25.0 / 33.0).epsilon(1e-9));
}

TEST_CASE("wra two-point perfect discrimination at K=1") {
  const auto c = confusion(testutil::make_pairs(1, {0, 2}, {2, 0}));
  CHECK(wra(c).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("wra is 0 when either class is empty") {
  const auto all_ones = confusion(testutil::make_pairs(2, {1, 1, 1}, {0, 0, 0}));
  CHECK(wra(all_ones).value == 0.0);
  const auto all_zeros = confusion(testutil::make_pairs(2, {0, 0, 0}, {1, 1, 1}));
  CHECK(wra(all_zeros).value == 0.0);
}

TEST_CASE("harmonic mean: frozen values and conventions") {
  CHECK(harmonic_mean(0.4485, 0.6434) == doctest::Approx(0.5286).epsilon(2e-4));
  CHECK(harmonic_mean(0.0, 0.7) == 0.0);
  CHECK(harmonic_mean(0.0, 0.0) == 0.0);
  CHECK(harmonic_mean(2.0 / 3.0, 25.0 / 33.0) == doctest::Approx(100.0 / 141.0).epsilon(1e-9));
  CHECK(harmonic_mean(2.0 / 3.0, 25.0 / 33.0) == doctest::Approx(0.709220).epsilon(1e-6));
}

TEST_CASE("metric kernels agree with the step-by-step oracle on random data") {
  std::mt19937_64 rng(20260808);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 12);
    const int n = 5 + static_cast<int>(rng() % 300);
    const auto pairs = testutil::random_pairs(rng, k, n);
    const auto c = confusion(pairs);
    const auto o = oracle::mpa_wra(pairs);
    CHECK(mpa(c).value == doctest::Approx(std::max(0.0, o.mpa_uncapped)).epsilon(1e-12));
    CHECK(wra(c).value == doctest::Approx(o.wra).epsilon(1e-12));
  }
}

TEST_CASE("range property: metrics stay in [0, 1] under fuzzing") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 24);
    const auto pairs = testutil::random_pairs(rng, k, 2 + static_cast<int>(rng() % 100));
    const auto c = confusion(pairs);
    const double m = mpa(c).value;
    const double w = wra(c).value;
    CHECK(m >= 0.0);
    CHECK(m <= 1.0 + 1e-12);
    CHECK(w >= 0.0);
    CHECK(w <= 1.0 + 1e-12);
    const double h = harmonic_mean(m, w);
    CHECK(h >= 0.0);
    CHECK(h <= 1.0 + 1e-12);
  }
}

TEST_CASE("recall sums to one over scores whenever positives exist") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 10);
    const auto pairs = testutil::random_pairs(rng, k, 30);
    const auto c = confusion(pairs);
    if (c.u1() == 0) continue;
    double sum = 0.0;
    for (int s = 0; s <= k; ++s) {
      if (const auto r = recall_at(c, s)) sum += *r;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("balanced step patterns reach mpa exactly 1 for K in 1..24") {
  for (int k = 1; k <= 24; ++k) {
    std::vector<int> ones(k + 1, 0), zeros(k + 1, 0);
    const int half = (k + 2) / 2;  // ceil((K+1)/2) lower scores get precision 0
    for (int s = 0; s <= k; ++s) {
      if (s < half) zeros[s] = 2;
      else ones[s] = 2;
    }
    const auto c = confusion(testutil::make_pairs(k, ones, zeros));
    CHECK(mpa(c).value == 1.0);
  }
}

TEST_CASE("score reversal of an increasing-precision confusion caps at 0") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 10);
    std::vector<int> ones(k + 1), zeros(k + 1);
    for (int s = 0; s <= k; ++s) {
      // strictly increasing precision s/(k+1) .. with denominators fixed
      ones[s] = 1 + s;
      zeros[s] = k + 1 - s;
    }
    const auto forward = confusion(testutil::make_pairs(k, ones, zeros));
    CHECK(mpa(forward).value > 0.0);
    std::vector<int> rev_ones(ones.rbegin(), ones.rend());
    std::vector<int> rev_zeros(zeros.rbegin(), zeros.rend());
    const auto reversed = confusion(testutil::make_pairs(k, rev_ones, rev_zeros));
    CHECK(mpa(reversed).value == 0.0);
  }
}

TEST_CASE("duplicating every pair leaves the metrics unchanged") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 8);
    const auto pairs = testutil::random_pairs(rng, k, 40);
    ReferencePairSet tripled = pairs;
    for (int copy = 0; copy < 2; ++copy) {
      for (const auto& p : pairs.pairs) tripled.pairs.push_back(p);
    }
    const auto a = confusion(pairs);
    const auto b = confusion(tripled);
    CHECK(mpa(a).value == doctest::Approx(mpa(b).value).epsilon(1e-12));
    CHECK(wra(a).value == doctest::Approx(wra(b).value).epsilon(1e-12));
  }
}

TEST_CASE("normalizer is the empirical maximum over extremal patterns") {
  // over all split points of a 0/1 step pattern the area peaks at
  // ceil((K+1)/2) * floor((K+1)/2), and no quantized pattern beats it
  std::mt19937_64 rng(41);
  for (int k = 1; k <= 24; ++k) {
    const int levels = k + 1;
    const double norm = std::ceil(levels / 2.0) * std::floor(levels / 2.0);
    double best_step = 0.0;
    for (int split = 1; split < levels; ++split) {
      std::vector<int> ones(levels), zeros(levels);
      for (int s = 0; s < levels; ++s) {
        if (s < split) zeros[s] = 1;
        else ones[s] = 1;
      }
      const auto o = oracle::mpa_wra(testutil::make_pairs(k, ones, zeros));
      best_step = std::max(best_step, o.mpa_uncapped * norm);
    }
    CHECK(best_step == doctest::Approx(norm).epsilon(1e-9));
    // random quantized precision patterns never exceed the normalizer
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<int> ones(levels), zeros(levels);
      for (int s = 0; s < levels; ++s) {
        ones[s] = static_cast<int>(rng() % 5);
        zeros[s] = static_cast<int>(rng() % 5);
        if (ones[s] + zeros[s] == 0) zeros[s] = 1;
      }
      const auto o = oracle::mpa_wra(testutil::make_pairs(k, ones, zeros));
      CHECK(o.mpa_uncapped <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("wra equals the strict concordance probability") {
  // P(S+ > S-) computed by brute force equals the curve integral
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 10);
    const auto pairs = testutil::random_pairs(rng, k, 60);
    const auto c = confusion(pairs);
    if (c.u1() == 0 || c.u0() == 0) continue;
    double wins = 0;
    for (const auto& p : pairs.pairs) {
      if (p.u != 1) continue;
      for (const auto& q : pairs.pairs) {
        if (q.u == 0 && p.s > q.s) wins += 1;
      }
    }
    const double expected = wins / (static_cast<double>(c.u1()) * static_cast<double>(c.u0()));
    CHECK(wra(c).value == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("stochastic ordering premise implies monotone empirical precision") {
  // noise-free construction: scores are monotone bins of a latent value and
  // each reference instance thresholds the same latent value, so dominance
  // holds per threshold; the empirical precision must be non-decreasing over
  // used scores and mpa must incur no cap
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ReferencePairSet pairs;
    pairs.scale = LikertScale(k);
    pairs.evaluated_unit = "construct";
    std::vector<double> thresholds(3);
    for (auto& t : thresholds) t = unit(rng);
    for (int i = 0; i < 300; ++i) {
      const double v = unit(rng);
      const int s = std::min(k, static_cast<int>(v * (k + 1)));
      for (const double t : thresholds) {
        pairs.pairs.push_back({"i" + std::to_string(i), s, v > t ? 1 : 0});
      }
    }
    const auto c = confusion(pairs);
    double prev = -1.0;
    for (int s = 0; s <= k; ++s) {
      const auto p = precision_at(c, s);
      if (!p) continue;
      CHECK(*p >= prev - 1e-12);
      prev = *p;
    }
    // discrimination premise: P(S >= s | U=1) >= P(S >= s | U=0)
    for (int s = 0; s <= k; ++s) {
      double ge1 = 0, ge0 = 0;
      for (int j = s; j <= k; ++j) {
        ge1 += static_cast<double>(c.n1[j]);
        ge0 += static_cast<double>(c.n0[j]);
      }
      CHECK(ge1 / c.u1() >= ge0 / c.u0() - 1e-12);
    }
    const auto o = oracle::mpa_wra(pairs);
    CHECK(o.mpa_uncapped >= 0.0);  // no cap engaged
    CHECK(mpa(c).value == doctest::Approx(o.mpa_uncapped).epsilon(1e-12));
  }
}

TEST_CASE("evaluate_unit: single set passes through, boundaries macro-average") {
  const auto fixture = testutil::worked_fixture();
  const auto single = evaluate_unit(fixture);
  CHECK(single.mpa == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(single.wra == doctest::Approx(25.0 / 33.0).epsilon(1e-9));
  CHECK(single.hm == doctest::Approx(100.0 / 141.0).epsilon(1e-9));
  CHECK(single.pair_count == 20);
  CHECK(single.per_boundary.size() == 1);

  auto a = testutil::make_pairs(4, {0, 0, 0, 2, 2}, {2, 2, 2, 0, 0});
  a.boundary = 1;
  auto b = testutil::worked_fixture();
  b.boundary = 2;
  const std::vector<ReferencePairSet> sets{a, b};
  const auto macro = evaluate_unit(sets);
  CHECK(macro.per_boundary.size() == 2);
  CHECK(macro.mpa == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-9));
  CHECK(macro.hm == doctest::Approx(harmonic_mean(macro.mpa, macro.wra)).epsilon(1e-12));
}

TEST_CASE("evaluate_unit: mean of two boundary mpa values") {
  // mpa 0.2 and 0.4 average to 0.3 regardless of other metrics
  auto mk = [](double target) {
    // build a two-level confusion whose mpa equals target: at K=1,
    // precision step (0, p) has curve (0, p, 0) with area p and norm 1
    const int ones = static_cast<int>(target * 10);
    return testutil::make_pairs(1, {0, ones}, {10, 10 - ones});
  };
  const std::vector<ReferencePairSet> sets{mk(0.2), mk(0.4)};
  const auto macro = evaluate_unit(sets);
  CHECK(macro.mpa == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("statistical consistency: deviations shrink from n to 4n") {
  // fixed generative model; median absolute deviation from the large-sample
  // value must not grow when the sample quadruples
  const int k = 4;
  const auto gen = [&](std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ReferencePairSet pairs;
    pairs.scale = LikertScale(k);
    for (int i = 0; i < n; ++i) {
      const double v = unit(rng);
      const int s = std::min(k, static_cast<int>(v * (k + 1)));
      const double p_one = 0.05 + 0.9 * v;
      pairs.pairs.push_back({"i" + std::to_string(i), s, unit(rng) < p_one ? 1 : 0});
    }
    return pairs;
  };
  std::mt19937_64 big_rng(101);
  const auto big = gen(big_rng, 200000);
  const auto cb = confusion(big);
  const double mpa_ref = mpa(cb).value;
  const double wra_ref = wra(cb).value;

  std::vector<double> dev_small_mpa, dev_big_mpa, dev_small_wra, dev_big_wra;
  for (int rep = 0; rep < 50; ++rep) {
    std::mt19937_64 r1(1000 + rep), r2(5000 + rep);
    const auto small_c = confusion(gen(r1, 500));
    const auto large_c = confusion(gen(r2, 2000));
    dev_small_mpa.push_back(std::abs(mpa(small_c).value - mpa_ref));
    dev_big_mpa.push_back(std::abs(mpa(large_c).value - mpa_ref));
    dev_small_wra.push_back(std::abs(wra(small_c).value - wra_ref));
    dev_big_wra.push_back(std::abs(wra(large_c).value - wra_ref));
  }
  const auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  CHECK(median(dev_big_mpa) <= median(dev_small_mpa));
  CHECK(median(dev_big_wra) <= median(dev_small_wra));
}
