#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ordmet/responsiveness.hpp"

namespace ordmet {

struct BaselineResult {
  std::optional<double> tau_b;
  std::optional<double> tau_a;
  std::optional<double> spearman_rho;
  std::optional<double> auroc;
  std::optional<double> aucpr;
  std::optional<double> mokken_h;
};

namespace detail {

// Merge-sort inversion count (Knight's algorithm backbone).
inline std::uint64_t count_inversions(std::vector<double>& v, std::vector<double>& buf) {
  const std::size_t n = v.size();
  if (n < 2) return 0;
  std::uint64_t swaps = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      if (mid >= hi) continue;
      std::size_t a = lo, b = mid, w = lo;
      while (a < mid && b < hi) {
        if (v[a] <= v[b]) {
          buf[w++] = v[a++];
        } else {
          swaps += mid - a;
          buf[w++] = v[b++];
        }
      }
      while (a < mid) buf[w++] = v[a++];
      while (b < hi) buf[w++] = v[b++];
      std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
    }
  }
  return swaps;
}

inline std::uint64_t tie_pairs(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::uint64_t t = 0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const std::uint64_t g = j - i;
    t += g * (g - 1) / 2;
    i = j;
  }
  return t;
}

// Midranks: ties share the average of the ranks they span.
inline std::vector<double> midranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && v[idx[j]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j - 1) + 1.0;  // 1-based midrank
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = r;
    i = j;
  }
  return ranks;
}

inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

struct ConcordanceCounts {
  std::uint64_t total_pairs = 0;
  std::uint64_t ties_x = 0;
  std::uint64_t ties_y = 0;
  std::int64_t concordant_minus_discordant = 0;
};

// Sorting by x (ties broken by y) makes discordant pairs exactly the y
// inversions; tie counts then correct for pairs that are no real comparison.
inline std::optional<ConcordanceCounts> concordance_counts(std::span<const double> x,
                                                           std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];

  // joint ties within runs of equal (x, y)
  std::uint64_t ties_xy = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j < n && x[idx[j]] == x[idx[i]] && y[idx[j]] == y[idx[i]]) ++j;
      const std::uint64_t g = j - i;
      ties_xy += g * (g - 1) / 2;
      i = j;
    }
  }
  ConcordanceCounts c;
  c.total_pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  c.ties_x = tie_pairs(std::vector<double>(x.begin(), x.end()));
  c.ties_y = tie_pairs(std::vector<double>(y.begin(), y.end()));

  std::vector<double> buf(n);
  const std::uint64_t swaps = count_inversions(ys, buf);
  // pairs tied in x only, or y only, and discordant pairs
  const std::uint64_t ties_x_only = c.ties_x - ties_xy;
  const std::uint64_t ties_y_only = c.ties_y - ties_xy;
  const std::uint64_t discordant = swaps;
  const std::uint64_t concordant =
      c.total_pairs - ties_x_only - ties_y_only - ties_xy - discordant;
  c.concordant_minus_discordant =
      static_cast<std::int64_t>(concordant) - static_cast<std::int64_t>(discordant);
  return c;
}

inline void extract(const ReferencePairSet& pairs, std::vector<double>& s,
                    std::vector<double>& u) {
  s.reserve(pairs.pairs.size());
  u.reserve(pairs.pairs.size());
  for (const auto& p : pairs.pairs) {
    s.push_back(static_cast<double>(p.s));
    u.push_back(static_cast<double>(p.u));
  }
}

}  // namespace detail

// Kendall's tau-b over (score, reference) pairs, O(n log n). Undefined when
// either marginal is constant.
inline std::optional<double> kendall_tau_b(std::span<const double> x,
                                           std::span<const double> y) {
  auto c = detail::concordance_counts(x, y);
  if (!c) return std::nullopt;
  const double px = static_cast<double>(c->total_pairs - c->ties_x);
  const double py = static_cast<double>(c->total_pairs - c->ties_y);
  if (px <= 0.0 || py <= 0.0) return std::nullopt;
  return static_cast<double>(c->concordant_minus_discordant) / std::sqrt(px * py);
}

// Tau-a: no tie correction, denominator is all pairs.
inline std::optional<double> kendall_tau_a(std::span<const double> x,
                                           std::span<const double> y) {
  auto c = detail::concordance_counts(x, y);
  if (!c) return std::nullopt;
  if (c->total_pairs == c->ties_x || c->total_pairs == c->ties_y) return std::nullopt;
  return static_cast<double>(c->concordant_minus_discordant) /
         static_cast<double>(c->total_pairs);
}

// Spearman's rho: Pearson correlation of midranks.
inline std::optional<double> spearman_rho(std::span<const double> x,
                                          std::span<const double> y) {
  if (x.size() < 2) return std::nullopt;
  const auto rx = detail::midranks(x);
  const auto ry = detail::midranks(y);
  return detail::pearson(rx, ry);
}

inline std::optional<double> kendall_tau_b(const ReferencePairSet& pairs) {
  std::vector<double> s, u;
  detail::extract(pairs, s, u);
  return kendall_tau_b(s, u);
}

inline std::optional<double> kendall_tau_a(const ReferencePairSet& pairs) {
  std::vector<double> s, u;
  detail::extract(pairs, s, u);
  return kendall_tau_a(s, u);
}

inline std::optional<double> spearman_rho(const ReferencePairSet& pairs) {
  std::vector<double> s, u;
  detail::extract(pairs, s, u);
  return spearman_rho(s, u);
}

// AUROC as the probability of concordance: (wins + ties/2) / (U1 * U0),
// where wins counts positive-score > negative-score pairs. Computed from the
// per-score tabulation in O(K). Undefined with a single-class reference.
inline std::optional<double> auroc(const ScoreConfusion& c) {
  const double u1 = static_cast<double>(c.u1());
  const double u0 = static_cast<double>(c.u0());
  if (u1 == 0.0 || u0 == 0.0) return std::nullopt;
  double wins = 0.0, ties = 0.0;
  std::int64_t zeros_below = 0;
  for (int s = 0; s < c.scale.levels(); ++s) {
    wins += static_cast<double>(c.n1[s]) * static_cast<double>(zeros_below);
    ties += static_cast<double>(c.n1[s]) * static_cast<double>(c.n0[s]);
    zeros_below += c.n0[s];
  }
  return (wins + 0.5 * ties) / (u1 * u0);
}

inline std::optional<double> auroc(const ReferencePairSet& pairs) {
  return auroc(confusion(pairs));
}

// Area under the precision-recall curve as non-interpolated average
// precision: sum over descending score thresholds of
// (recall increment) * (precision at the threshold). Undefined without positives.
inline std::optional<double> aucpr(const ScoreConfusion& c) {
  const double u1 = static_cast<double>(c.u1());
  if (u1 == 0.0) return std::nullopt;
  double ap = 0.0;
  double prev_recall = 0.0;
  std::int64_t tp = 0, fp = 0;
  for (int s = c.scale.k_max; s >= 0; --s) {
    if (c.n[s] == 0) continue;
    tp += c.n1[s];
    fp += c.n0[s];
    const double recall = static_cast<double>(tp) / u1;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

inline std::optional<double> aucpr(const ReferencePairSet& pairs) {
  return aucpr(confusion(pairs));
}

// Scalability of the unit's scores against the rest scores:
//   H = cov(S, R) / cov of the comonotonic rearrangement (both sorted ascending).
// H = 1 when the unit orders items exactly as the rest of the population;
// may be negative. Undefined with fewer than two shared items or a constant
// marginal.
inline std::optional<double> mokken_h(const GroupScoreTable& unit_scores,
                                      const std::map<std::string, double>& rest) {
  std::vector<double> s, r;
  for (const auto& [item, entry] : unit_scores.entries) {
    auto it = rest.find(item);
    if (it == rest.end()) continue;
    s.push_back(static_cast<double>(entry.first));
    r.push_back(it->second);
  }
  const std::size_t n = s.size();
  if (n < 2) return std::nullopt;
  const double ms = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n);
  const double mr = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(n);
  double cov = 0.0;
  for (std::size_t i = 0; i < n; ++i) cov += (s[i] - ms) * (r[i] - mr);
  std::vector<double> ss = s, rs = r;
  std::sort(ss.begin(), ss.end());
  std::sort(rs.begin(), rs.end());
  double cov_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) cov_max += (ss[i] - ms) * (rs[i] - mr);
  if (cov_max <= 0.0) return std::nullopt;  // constant marginal
  return cov / cov_max;
}

// All pair-set baselines at once (mokken_h needs rest scores and is filled
// in by the caller when available).
inline BaselineResult baselines(const ReferencePairSet& pairs) {
  BaselineResult out;
  std::vector<double> s, u;
  detail::extract(pairs, s, u);
  out.tau_b = kendall_tau_b(s, u);
  out.tau_a = kendall_tau_a(s, u);
  out.spearman_rho = spearman_rho(s, u);
  const auto c = confusion(pairs);
  out.auroc = auroc(c);
  out.aucpr = aucpr(c);
  return out;
}

}  // namespace ordmet
