// Independent reference implementations used only by the tests. These are
// deliberately written as plain step-by-step routines (quadratic loops,
// explicit arrays) so they share no code or algorithmic shortcuts with the
// library implementations they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ordmet/reference.hpp"

namespace oracle {

// Generic trapezoidal area over explicit (x, y) points.
inline double auc_trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    area += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
  }
  return area;
}

struct MpaWra {
  double mpa_uncapped = 0.0;  // normalized but not floored at 0
  double wra = 0.0;
  std::vector<double> y_so;
  std::vector<double> y_d;
};

// Step-by-step transcription of the metric definition over raw score /
// reference arrays: tabulate counts per score, build the running-max
// precision array, accumulate the two curves, integrate with the generic
// trapezoid over x = 0..K+1.
inline MpaWra mpa_wra(const std::vector<int>& scores, const std::vector<int>& refs, int k_max) {
  const int levels = k_max + 1;
  std::vector<double> counts(levels, 0), one_counts(levels, 0), zero_counts(levels, 0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    counts[scores[i]] += 1;
    if (refs[i] == 1) one_counts[scores[i]] += 1;
    else zero_counts[scores[i]] += 1;
  }

  MpaWra out;
  for (int k = 0; k < levels; ++k) {
    std::vector<double> prev_precisions;
    double running = -1.0;
    for (int j = 0; j < k; ++j) {
      if (counts[j] != 0) {
        const double p = one_counts[j] / counts[j];
        running = prev_precisions.empty() ? p : std::max(running, p);
        prev_precisions.push_back(running);
      }
    }
    double y = 0.0;
    if (counts[k] != 0 && !prev_precisions.empty()) {
      const double precision_at_k = one_counts[k] / counts[k];
      for (double m : prev_precisions) y += precision_at_k - m;
    }
    out.y_so.push_back(y);
  }
  out.y_so.push_back(0.0);

  std::vector<double> xs(levels + 1);
  std::iota(xs.begin(), xs.end(), 0.0);
  const double norm = std::ceil(levels / 2.0) * std::floor(levels / 2.0);
  out.mpa_uncapped = auc_trapezoid(xs, out.y_so) / norm;

  const double u0 = std::accumulate(zero_counts.begin(), zero_counts.end(), 0.0);
  const double u1 = std::accumulate(one_counts.begin(), one_counts.end(), 0.0);
  for (int k = 0; k < levels; ++k) {
    double below = 0.0;
    for (int j = 0; j < k; ++j) below += zero_counts[j];
    const double zero_recall_below = u0 != 0.0 ? below / u0 : 0.0;
    const double one_recall_at = u1 != 0.0 ? one_counts[k] / u1 : 0.0;
    out.y_d.push_back(zero_recall_below * one_recall_at);
  }
  out.y_d.push_back(0.0);
  out.wra = auc_trapezoid(xs, out.y_d);
  return out;
}

inline MpaWra mpa_wra(const ordmet::ReferencePairSet& pairs) {
  std::vector<int> s, u;
  for (const auto& p : pairs.pairs) {
    s.push_back(p.s);
    u.push_back(p.u);
  }
  return mpa_wra(s, u, pairs.scale.k_max);
}

// O(n^2) concordance counting for Kendall coefficients.
struct TauCounts {
  double concordant = 0, discordant = 0, ties_x = 0, ties_y = 0, ties_xy = 0, total = 0;
};

inline TauCounts tau_counts(const std::vector<double>& x, const std::vector<double>& y) {
  TauCounts c;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      c.total += 1;
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0 && dy == 0) c.ties_xy += 1;
      else if (dx == 0) c.ties_x += 1;
      else if (dy == 0) c.ties_y += 1;
      else if (dx * dy > 0) c.concordant += 1;
      else c.discordant += 1;
    }
  }
  c.ties_x += c.ties_xy;
  c.ties_y += c.ties_xy;
  return c;
}

inline std::optional<double> tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  const auto c = tau_counts(x, y);
  const double px = c.total - c.ties_x;
  const double py = c.total - c.ties_y;
  if (px <= 0 || py <= 0) return std::nullopt;
  return (c.concordant - c.discordant) / std::sqrt(px * py);
}

inline std::optional<double> tau_a(const std::vector<double>& x, const std::vector<double>& y) {
  const auto c = tau_counts(x, y);
  if (c.total == c.ties_x || c.total == c.ties_y || c.total == 0) return std::nullopt;
  return (c.concordant - c.discordant) / c.total;
}

// All-pairs probability of concordance.
inline std::optional<double> auroc(const std::vector<int>& scores, const std::vector<int>& refs) {
  double wins = 0, ties = 0, n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (refs[i] != 1) continue;
    n_pos += 1;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (refs[j] == 1) continue;
      if (scores[i] > scores[j]) wins += 1;
      else if (scores[i] == scores[j]) ties += 1;
    }
  }
  for (int r : refs) n_neg += r == 0 ? 1 : 0;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  return (wins + 0.5 * ties) / (n_pos * n_neg);
}

// Trapezoidal area under the empirical ROC built from score thresholds.
inline std::optional<double> auroc_trapezoid(const std::vector<int>& scores,
                                             const std::vector<int>& refs, int k_max) {
  double n_pos = 0, n_neg = 0;
  for (int r : refs) (r == 1 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  std::vector<double> fpr{0.0}, tpr{0.0};
  double tp = 0, fp = 0;
  for (int t = k_max; t >= 0; --t) {
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] == t) (refs[i] == 1 ? tp : fp) += 1;
    }
    fpr.push_back(fp / n_neg);
    tpr.push_back(tp / n_pos);
  }
  return auc_trapezoid(fpr, tpr);
}

// Average precision over every threshold level K..0, including unused ones.
inline std::optional<double> aucpr(const std::vector<int>& scores, const std::vector<int>& refs,
                                   int k_max) {
  double n_pos = 0;
  for (int r : refs) n_pos += r == 1 ? 1 : 0;
  if (n_pos == 0) return std::nullopt;
  double ap = 0.0, prev_recall = 0.0;
  for (int t = k_max; t >= 0; --t) {
    double tp = 0, predicted = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) {
        predicted += 1;
        if (refs[i] == 1) tp += 1;
      }
    }
    if (predicted == 0) continue;
    const double recall = tp / n_pos;
    ap += (recall - prev_recall) * (tp / predicted);
    prev_recall = recall;
  }
  return ap;
}

// Midranks by direct counting, then a plain Pearson correlation.
inline std::vector<double> midranks(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) less += 1;
      else if (v[j] == v[i]) equal += 1;
    }
    out[i] = less + (equal + 1.0) / 2.0;
  }
  return out;
}

inline std::optional<double> spearman(const std::vector<double>& x,
                                      const std::vector<double>& y) {
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

// Scalability coefficient with the maximizing covariance found by exhaustive
// search over pairings (n <= 8).
inline std::optional<double> mokken_exhaustive(std::vector<double> s, std::vector<double> r) {
  const std::size_t n = s.size();
  double ms = std::accumulate(s.begin(), s.end(), 0.0) / n;
  double mr = std::accumulate(r.begin(), r.end(), 0.0) / n;
  double cov = 0;
  for (std::size_t i = 0; i < n; ++i) cov += (s[i] - ms) * (r[i] - mr);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -1e300;
  do {
    double c = 0;
    for (std::size_t i = 0; i < n; ++i) c += (s[i] - ms) * (r[perm[i]] - mr);
    best = std::max(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (best <= 0) return std::nullopt;
  return cov / best;
}

}  // namespace oracle
