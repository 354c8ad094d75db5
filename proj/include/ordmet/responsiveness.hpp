#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ordmet/reference.hpp"

namespace ordmet {

// Per-score tabulation of a pair set: n[s] pairs at score s, of which n1[s]
// carry reference 1 and n0[s] carry reference 0.
struct ScoreConfusion {
  LikertScale scale{1};
  std::vector<std::int64_t> n;
  std::vector<std::int64_t> n1;
  std::vector<std::int64_t> n0;

  std::int64_t u1() const {
    std::int64_t t = 0;
    for (auto v : n1) t += v;
    return t;
  }
  std::int64_t u0() const {
    std::int64_t t = 0;
    for (auto v : n0) t += v;
    return t;
  }
  std::int64_t total() const { return u1() + u0(); }
};

inline ScoreConfusion confusion(const ReferencePairSet& pairs) {
  if (pairs.pairs.empty()) throw ValidationError("confusion: empty pair set");
  ScoreConfusion c;
  c.scale = pairs.scale;
  c.n.assign(pairs.scale.levels(), 0);
  c.n1.assign(pairs.scale.levels(), 0);
  c.n0.assign(pairs.scale.levels(), 0);
  for (const auto& p : pairs.pairs) {
    c.n[p.s]++;
    (p.u ? c.n1 : c.n0)[p.s]++;
  }
  return c;
}

// Precision when score s is taken as positive: n1[s] / n[s].
// Unused scores have no precision; that is a value, not an error.
inline std::optional<double> precision_at(const ScoreConfusion& c, int s) {
  if (c.n[s] == 0) return std::nullopt;
  return static_cast<double>(c.n1[s]) / static_cast<double>(c.n[s]);
}

inline std::optional<double> recall_at(const ScoreConfusion& c, int s) {
  const auto u1 = c.u1();
  if (u1 == 0) return std::nullopt;
  return static_cast<double>(c.n1[s]) / static_cast<double>(u1);
}

enum class CurveKind { precision, recall, mpa_curve, wra_curve };

inline const char* to_string(CurveKind k) {
  switch (k) {
    case CurveKind::precision: return "precision";
    case CurveKind::recall: return "recall";
    case CurveKind::mpa_curve: return "mpa_curve";
    case CurveKind::wra_curve: return "wra_curve";
  }
  return "?";
}

// Curve sampled at integer scores. The two area curves carry a terminal zero
// at x = k_max + 1; precision/recall stop at k_max and may have gaps.
struct CurvePoints {
  CurveKind kind = CurveKind::precision;
  std::vector<int> xs;
  std::vector<std::optional<double>> ys;
};

namespace detail {

// Trapezoidal area over unit-spaced x.
inline double trapezoid(const std::vector<double>& y) {
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) area += 0.5 * (y[i] + y[i + 1]);
  return area;
}

inline CurvePoints to_curve(CurveKind kind, const std::vector<double>& y) {
  CurvePoints c;
  c.kind = kind;
  c.xs.resize(y.size());
  c.ys.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    c.xs[i] = static_cast<int>(i);
    c.ys[i] = y[i];
  }
  return c;
}

}  // namespace detail

struct AreaResult {
  double value = 0.0;
  CurvePoints curve;
};

// Monotonic precision area. At each score s the curve accumulates
//   sum over previously used scores j < s of (precision(s) - cummax precision(j))
// so any dip below an earlier precision level is penalized. Unused scores
// contribute 0 and are skipped in the running maximum. The area under the
// curve (trapezoid over x = 0..k_max+1, terminal 0 appended) is normalized
// by ceil((K+1)/2) * floor((K+1)/2), the largest achievable area, and capped
// below at 0.
inline AreaResult mpa(const ScoreConfusion& c) {
  const int levels = c.scale.levels();
  std::vector<double> y(levels + 1, 0.0);
  std::vector<double> cummax;  // running max of defined precisions below s
  cummax.reserve(levels);
  double running = 0.0;
  for (int s = 0; s < levels; ++s) {
    if (c.n[s] > 0 && !cummax.empty()) {
      const double prec = static_cast<double>(c.n1[s]) / static_cast<double>(c.n[s]);
      double acc = 0.0;
      for (double m : cummax) acc += prec - m;
      y[s] = acc;
    }
    if (c.n[s] > 0) {
      const double prec = static_cast<double>(c.n1[s]) / static_cast<double>(c.n[s]);
      running = cummax.empty() ? prec : std::max(running, prec);
      cummax.push_back(running);
    }
  }
  const double norm = std::ceil(levels / 2.0) * std::floor(levels / 2.0);
  AreaResult r;
  r.value = std::max(0.0, detail::trapezoid(y) / norm);
  r.curve = detail::to_curve(CurveKind::mpa_curve, y);
  return r;
}

// Weighted recall area. At each score s the curve is
//   P(S < s | U = 0) * P(S = s | U = 1)
// with either factor taken as 0 when its class is empty. Recall already sums
// to 1 over scores, so the trapezoidal area needs no normalization.
inline AreaResult wra(const ScoreConfusion& c) {
  const int levels = c.scale.levels();
  const double u1 = static_cast<double>(c.u1());
  const double u0 = static_cast<double>(c.u0());
  std::vector<double> y(levels + 1, 0.0);
  std::int64_t zeros_below = 0;
  for (int s = 0; s < levels; ++s) {
    const double zero_recall_below = u0 > 0 ? static_cast<double>(zeros_below) / u0 : 0.0;
    const double one_recall_at = u1 > 0 ? static_cast<double>(c.n1[s]) / u1 : 0.0;
    y[s] = zero_recall_below * one_recall_at;
    zeros_below += c.n0[s];
  }
  AreaResult r;
  r.value = detail::trapezoid(y);
  r.curve = detail::to_curve(CurveKind::wra_curve, y);
  return r;
}

// Harmonic mean with the 0/0 case defined as 0 (the limit of hm(x, 0)).
inline double harmonic_mean(double a, double b) {
  if (a + b <= 0.0) return 0.0;
  return 2.0 * a * b / (a + b);
}

inline CurvePoints precision_curve(const ScoreConfusion& c) {
  CurvePoints out;
  out.kind = CurveKind::precision;
  for (int s = 0; s < c.scale.levels(); ++s) {
    out.xs.push_back(s);
    out.ys.push_back(precision_at(c, s));
  }
  return out;
}

inline CurvePoints recall_curve(const ScoreConfusion& c) {
  CurvePoints out;
  out.kind = CurveKind::recall;
  for (int s = 0; s < c.scale.levels(); ++s) {
    out.xs.push_back(s);
    out.ys.push_back(recall_at(c, s));
  }
  return out;
}

struct BoundaryMetrics {
  std::optional<int> boundary;
  double mpa = 0.0;
  double wra = 0.0;
  double hm = 0.0;
  std::int64_t pair_count = 0;
  std::vector<CurvePoints> curves;
};

struct ResponsivenessResult {
  double mpa = 0.0;
  double wra = 0.0;
  double hm = 0.0;
  std::int64_t pair_count = 0;
  std::vector<BoundaryMetrics> per_boundary;
};

// Metrics for one evaluated unit. A guideline reference supplies a single
// pair set; a crowd reference supplies one per boundary, and the result is
// the unweighted mean of mpa and wra across boundaries with hm recomputed
// from those means.
inline ResponsivenessResult evaluate_unit(std::span<const ReferencePairSet> pair_sets,
                                          bool keep_curves = false) {
  if (pair_sets.empty()) throw ValidationError("evaluate_unit: no pair sets");
  ResponsivenessResult out;
  double mpa_sum = 0.0, wra_sum = 0.0;
  for (const auto& set : pair_sets) {
    const auto c = confusion(set);
    const auto m = mpa(c);
    const auto w = wra(c);
    BoundaryMetrics bm;
    bm.boundary = set.boundary;
    bm.mpa = m.value;
    bm.wra = w.value;
    bm.hm = harmonic_mean(m.value, w.value);
    bm.pair_count = static_cast<std::int64_t>(set.pairs.size());
    if (keep_curves) {
      bm.curves = {precision_curve(c), recall_curve(c), m.curve, w.curve};
    }
    mpa_sum += bm.mpa;
    wra_sum += bm.wra;
    out.per_boundary.push_back(std::move(bm));
  }
  const double k = static_cast<double>(pair_sets.size());
  out.mpa = mpa_sum / k;
  out.wra = wra_sum / k;
  out.hm = harmonic_mean(out.mpa, out.wra);
  out.pair_count = out.per_boundary.front().pair_count;
  return out;
}

inline ResponsivenessResult evaluate_unit(const ReferencePairSet& single,
                                          bool keep_curves = false) {
  return evaluate_unit(std::span<const ReferencePairSet>(&single, 1), keep_curves);
}

}  // namespace ordmet
