#pragma once

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ordmet/aggregate.hpp"
#include "ordmet/baselines.hpp"
#include "ordmet/inference.hpp"
#include "ordmet/jsonl.hpp"
#include "ordmet/ratings.hpp"
#include "ordmet/reference.hpp"
#include "ordmet/report.hpp"
#include "ordmet/responsiveness.hpp"

namespace ordmet {

enum class ReferenceChoice { guideline, crowd, both };

inline const char* to_string(ReferenceChoice r) {
  switch (r) {
    case ReferenceChoice::guideline: return "guideline";
    case ReferenceChoice::crowd: return "crowd";
    case ReferenceChoice::both: return "both";
  }
  return "?";
}

struct ItemFilter {
  std::string tag;
  std::string value;

  std::string label() const { return tag + "=" + value; }
};

struct RunConfig {
  std::string ratings_path;
  std::string binary_path;
  std::string attributes_path;
  std::string items_path;  // optional, required only with a filter
  int k_max = 4;
  std::vector<GroupKey> groups;
  std::optional<std::vector<std::string>> trisect_axes;
  ReferenceChoice reference = ReferenceChoice::both;
  AggregationPolicy aggregation;
  ResampleConfig resample;
  std::optional<ItemFilter> filter;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int workers = 1;
  bool collapse_majority = false;
  bool aggregate_reference = false;
};

// Parses "axis=value|axis=value" (or "all") into a group key.
inline GroupKey parse_group_label(const std::string& label) {
  GroupKey key;
  if (label.empty() || label == "all") return key;
  std::stringstream ss(label);
  std::string part;
  while (std::getline(ss, part, '|')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("bad group selector '" + part + "' (want axis=value)");
    }
    key.selectors.emplace_back(part.substr(0, eq), part.substr(eq + 1));
  }
  return key;
}

// Run configuration from JSON. CLI-level overrides are applied by the caller
// after loading. The master seed feeds the aggregation and resampling seeds
// unless those are given explicitly.
inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error("config " + path + ": " + e.what());
  }
  RunConfig cfg;
  const auto base = std::filesystem::path(path).parent_path();
  const auto resolve = [&](const std::string& p) {
    if (p.empty()) return p;
    std::filesystem::path fp(p);
    return fp.is_absolute() ? p : (base / fp).string();
  };
  cfg.ratings_path = resolve(j.value("ratings", ""));
  cfg.binary_path = resolve(j.value("binary", ""));
  cfg.attributes_path = resolve(j.value("attributes", ""));
  cfg.items_path = resolve(j.value("items", ""));
  cfg.k_max = j.value("k_max", 4);
  if (j.contains("groups")) {
    for (const auto& g : j["groups"]) {
      GroupKey key;
      if (g.is_string()) {
        key = parse_group_label(g.get<std::string>());
      } else {
        for (auto it = g.begin(); it != g.end(); ++it) {
          key.selectors.emplace_back(it.key(), it.value().get<std::string>());
        }
      }
      cfg.groups.push_back(std::move(key));
    }
  }
  if (j.contains("trisect_axes")) {
    cfg.trisect_axes = j["trisect_axes"].get<std::vector<std::string>>();
    if (cfg.trisect_axes->size() != 3) {
      throw ValidationError("trisect_axes must name exactly three axes");
    }
  }
  const std::string ref = j.value("reference", "both");
  if (ref == "guideline") cfg.reference = ReferenceChoice::guideline;
  else if (ref == "crowd") cfg.reference = ReferenceChoice::crowd;
  else if (ref == "both") cfg.reference = ReferenceChoice::both;
  else throw ValidationError("reference must be guideline, crowd or both");

  cfg.seed = j.value("seed", 0ull);
  if (j.contains("aggregation")) {
    const auto& a = j["aggregation"];
    const std::string kind = a.value("kind", "plurality");
    if (kind == "plurality") cfg.aggregation.kind = AggregationKind::plurality;
    else if (kind == "median") cfg.aggregation.kind = AggregationKind::median;
    else if (kind == "mean") cfg.aggregation.kind = AggregationKind::mean;
    else throw ValidationError("aggregation.kind must be plurality, median or mean");
    cfg.aggregation.seed = a.value("seed", KeyedRng(cfg.seed).child("aggregation").next_u64());
  } else {
    cfg.aggregation.seed = KeyedRng(cfg.seed).child("aggregation").next_u64();
  }
  if (j.contains("resample")) {
    const auto& r = j["resample"];
    cfg.resample.bootstrap_trials = r.value("bootstrap_trials", 100);
    cfg.resample.permutations = r.value("permutations", 1000);
    cfg.resample.alpha = r.value("alpha", 0.05);
    cfg.resample.seed = r.value("seed", KeyedRng(cfg.seed).child("resample").next_u64());
  } else {
    cfg.resample.seed = KeyedRng(cfg.seed).child("resample").next_u64();
  }
  if (j.contains("filter")) {
    cfg.filter = ItemFilter{j["filter"].value("tag", ""), j["filter"].value("value", "")};
    if (cfg.filter->tag.empty()) throw ValidationError("filter.tag must be non-empty");
  }
  cfg.out_dir = j.value("out_dir", ".");
  cfg.collapse_majority = j.value("collapse_majority", false);
  cfg.aggregate_reference = j.value("aggregate_reference", false);
  return cfg;
}

// Re-seeds everything from one master seed (the --seed flag).
inline void override_seed(RunConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.aggregation.seed = KeyedRng(seed).child("aggregation").next_u64();
  cfg.resample.seed = KeyedRng(seed).child("resample").next_u64();
}

// Canonical form for hashing: analysis parameters only, no paths or
// execution details, so reports from relocated datasets stay comparable.
inline nlohmann::ordered_json canonical_config(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["k_max"] = cfg.k_max;
  nlohmann::ordered_json groups = nlohmann::ordered_json::array();
  for (const auto& g : cfg.groups) groups.push_back(g.label());
  j["groups"] = groups;
  if (cfg.trisect_axes) j["trisect_axes"] = *cfg.trisect_axes;
  j["reference"] = to_string(cfg.reference);
  j["aggregation"] = {{"kind", to_string(cfg.aggregation.kind)}, {"seed", cfg.aggregation.seed}};
  j["resample"] = {{"bootstrap_trials", cfg.resample.bootstrap_trials},
                   {"permutations", cfg.resample.permutations},
                   {"alpha", round9(cfg.resample.alpha)},
                   {"seed", cfg.resample.seed}};
  j["filter"] = cfg.filter ? nlohmann::ordered_json(cfg.filter->label())
                           : nlohmann::ordered_json(nullptr);
  j["collapse_majority"] = cfg.collapse_majority;
  j["aggregate_reference"] = cfg.aggregate_reference;
  return j;
}

struct Dataset {
  RatingTable table{LikertScale(1), {}};
  std::vector<BinaryRecord> binary;
  std::vector<RaterAttributes> attributes;
  std::vector<ItemMeta> items;
  std::vector<std::string> warnings;
};

inline Dataset load_dataset(const RunConfig& cfg) {
  Dataset d;
  if (cfg.ratings_path.empty()) throw ValidationError("config: ratings path missing");
  auto ratings = cfg.ratings_path.ends_with(".jsonl")
                     ? load_ratings_jsonl(cfg.ratings_path, LikertScale(cfg.k_max))
                     : load_ratings(cfg.ratings_path, LikertScale(cfg.k_max));
  d.table = std::move(ratings.value);
  d.warnings = std::move(ratings.warnings);
  if (!cfg.binary_path.empty()) {
    auto binary = cfg.binary_path.ends_with(".jsonl") ? load_binary_jsonl(cfg.binary_path)
                                                      : load_binary(cfg.binary_path);
    d.binary = std::move(binary.value);
    for (auto& w : binary.warnings) d.warnings.push_back(std::move(w));
  }
  if (!cfg.attributes_path.empty()) {
    auto attrs = load_attributes(cfg.attributes_path);
    d.attributes = std::move(attrs.value);
    for (auto& w : attrs.warnings) d.warnings.push_back(std::move(w));
  }
  if (!cfg.items_path.empty()) {
    auto items = load_items(cfg.items_path);
    d.items = std::move(items.value);
    for (auto& w : items.warnings) d.warnings.push_back(std::move(w));
  }
  return d;
}

// Explicit groups plus, when trisect_axes is set, every trisection observed
// among the raters (sorted by label, deduplicated).
inline std::vector<GroupKey> resolve_groups(const RunConfig& cfg,
                                            const std::vector<RaterAttributes>& attrs) {
  std::vector<GroupKey> out = cfg.groups;
  if (cfg.trisect_axes) {
    std::set<std::string> seen;
    std::vector<GroupKey> generated;
    for (const auto& a : attrs) {
      GroupKey key;
      bool complete = true;
      for (const auto& axis : *cfg.trisect_axes) {
        auto it = a.attributes.find(axis);
        if (it == a.attributes.end()) {
          complete = false;
          break;
        }
        key.selectors.emplace_back(axis, it->second);
      }
      if (complete && seen.insert(key.label()).second) generated.push_back(std::move(key));
    }
    std::sort(generated.begin(), generated.end(),
              [](const GroupKey& a, const GroupKey& b) { return a.label() < b.label(); });
    out.insert(out.end(), generated.begin(), generated.end());
  }
  if (out.empty()) out.push_back(GroupKey::all());
  return out;
}

// Dataset restricted to items carrying the filter tag value.
inline Dataset filter_dataset(const Dataset& d, const ItemFilter& f, const LikertScale& scale) {
  std::set<std::string> keep;
  for (const auto& m : d.items) {
    auto it = m.tags.find(f.tag);
    if (it != m.tags.end() && it->second == f.value) keep.insert(m.item_id);
  }
  Dataset out;
  std::vector<RatingRecord> records;
  for (const auto& r : d.table.records()) {
    if (keep.contains(r.item_id)) records.push_back(r);
  }
  out.table = RatingTable(scale, std::move(records));
  for (const auto& b : d.binary) {
    if (keep.contains(b.item_id)) out.binary.push_back(b);
  }
  out.attributes = d.attributes;
  for (const auto& m : d.items) {
    if (keep.contains(m.item_id)) out.items.push_back(m);
  }
  return out;
}

struct CiEntry {
  std::string metric;
  IntervalResult interval;
};

// One report row: a (group, reference kind, optional tag) combination.
struct AnalysisRow {
  GroupKey group;
  ReferenceKind reference = ReferenceKind::guideline;
  std::optional<std::string> tag;
  bool defined = false;
  std::vector<std::string> flags;
  int raters = 0;
  int items = 0;
  int dropped_items = 0;
  ResponsivenessResult resp;
  BaselineResult base;
  int defined_boundaries = 0;  // crowd rows: boundaries contributing to baselines
  std::vector<CiEntry> cis;
};

namespace detail {

inline std::optional<double> macro_optional(
    const std::vector<std::optional<double>>& values, int& defined_count) {
  double sum = 0.0;
  int n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  defined_count = n;
  if (n == 0) return std::nullopt;
  return sum / n;
}

// Baselines macro-averaged over boundary pair sets (defined boundaries only).
inline BaselineResult macro_baselines(std::span<const ReferencePairSet> sets,
                                      int& defined_boundaries) {
  std::vector<std::optional<double>> tb, ta, rho, roc, pr;
  for (const auto& s : sets) {
    const auto b = baselines(s);
    tb.push_back(b.tau_b);
    ta.push_back(b.tau_a);
    rho.push_back(b.spearman_rho);
    roc.push_back(b.auroc);
    pr.push_back(b.aucpr);
  }
  BaselineResult out;
  int n = 0;
  out.tau_b = macro_optional(tb, n);
  defined_boundaries = n;
  out.tau_a = macro_optional(ta, n);
  out.spearman_rho = macro_optional(rho, n);
  out.auroc = macro_optional(roc, n);
  out.aucpr = macro_optional(pr, n);
  return out;
}

using MetricKernel = std::function<std::optional<double>(const ReferencePairSet&)>;

inline std::map<std::string, MetricKernel> ci_kernels() {
  return {
      {"mpa", [](const ReferencePairSet& p) { return mpa(confusion(p)).value; }},
      {"wra", [](const ReferencePairSet& p) { return wra(confusion(p)).value; }},
      {"hm",
       [](const ReferencePairSet& p) {
         const auto c = confusion(p);
         return harmonic_mean(mpa(c).value, wra(c).value);
       }},
      {"tau_b", [](const ReferencePairSet& p) { return kendall_tau_b(p); }},
      {"spearman_rho", [](const ReferencePairSet& p) { return spearman_rho(p); }},
      {"auroc", [](const ReferencePairSet& p) { return auroc(p); }},
      {"aucpr", [](const ReferencePairSet& p) { return aucpr(p); }},
  };
}

inline const std::vector<std::string>& ci_metric_order() {
  static const std::vector<std::string> order{"mpa",   "wra",   "hm",   "tau_b",
                                              "spearman_rho", "auroc", "aucpr"};
  return order;
}

}  // namespace detail

// Analysis of one group against one reference kind. Failures that only
// affect this row (no raters, empty reference) are reported as flags on an
// undefined row rather than errors.
inline AnalysisRow analyze_group(const Dataset& data, const RunConfig& cfg, const GroupKey& group,
                                 ReferenceKind kind) {
  AnalysisRow row;
  row.group = group;
  row.reference = kind;
  if (cfg.filter) row.tag = cfg.filter->label();

  std::set<std::string> raters;
  try {
    raters = select_raters(data.attributes, group);
  } catch (const ValidationError& e) {
    row.flags.push_back(e.what());
    return row;
  }
  row.raters = static_cast<int>(raters.size());
  if (raters.empty()) {
    row.flags.push_back("no raters match group");
    return row;
  }

  GroupScoreTable scores;
  try {
    scores = aggregate(data.table, raters, cfg.aggregation);
  } catch (const ValidationError& e) {
    row.flags.push_back(e.what());
    return row;
  }
  row.items = static_cast<int>(scores.size());
  if (scores.size() == 0) {
    row.flags.push_back("group has no ratings");
    return row;
  }

  const LikertScale scale = data.table.scale();
  try {
    if (kind == ReferenceKind::guideline) {
      const auto pairs = guideline_pairs(scores, data.binary, scale, group.label(),
                                         cfg.collapse_majority);
      row.dropped_items = pairs.dropped_items;
      row.resp = evaluate_unit(pairs);
      row.base = baselines(pairs);
      row.defined_boundaries = 1;
      for (const auto& name : detail::ci_metric_order()) {
        row.cis.push_back(
            {name, bootstrap_ci(detail::ci_kernels().at(name), pairs, cfg.resample, cfg.workers)});
      }
    } else {
      std::vector<ReferencePairSet> sets;
      for (const auto& b : all_boundaries(scale)) {
        sets.push_back(crowd_pairs(data.table, raters, scores, b, group.label(),
                                   cfg.aggregate_reference));
      }
      row.dropped_items = sets.front().dropped_items;
      row.resp = evaluate_unit(sets);
      row.base = detail::macro_baselines(sets, row.defined_boundaries);
      for (const auto& name : detail::ci_metric_order()) {
        const auto kernel = detail::ci_kernels().at(name);
        const auto macro_kernel =
            [&kernel](std::span<const ReferencePairSet> reps) -> std::optional<double> {
          std::vector<std::optional<double>> values;
          for (const auto& rep : reps) {
            if (rep.pairs.empty()) return std::nullopt;
            values.push_back(kernel(rep));
          }
          int n = 0;
          return detail::macro_optional(values, n);
        };
        row.cis.push_back(
            {name, bootstrap_ci_macro(macro_kernel, sets, cfg.resample, cfg.workers)});
      }
    }
    // rest-score scalability against the non-member population
    row.base.mokken_h = mokken_h(scores, rest_scores(data.table, raters));
    row.defined = true;
  } catch (const ValidationError& e) {
    row.flags.push_back(e.what());
    row.defined = false;
  }
  return row;
}

struct MetricsReport {
  std::vector<AnalysisRow> rows;
  std::vector<std::string> warnings;
};

inline MetricsReport run_metrics(const Dataset& data_full, const RunConfig& cfg) {
  MetricsReport report;
  const Dataset* data = &data_full;
  Dataset filtered;
  if (cfg.filter) {
    if (data_full.items.empty()) {
      throw ValidationError("filter given but no items file loaded");
    }
    filtered = filter_dataset(data_full, *cfg.filter, data_full.table.scale());
    data = &filtered;
  }
  const auto groups = resolve_groups(cfg, data->attributes);
  std::vector<ReferenceKind> kinds;
  if (cfg.reference != ReferenceChoice::crowd) kinds.push_back(ReferenceKind::guideline);
  if (cfg.reference != ReferenceChoice::guideline) kinds.push_back(ReferenceKind::crowd);

  for (const auto& group : groups) {
    for (const auto kind : kinds) {
      if (kind == ReferenceKind::guideline && data->binary.empty()) {
        AnalysisRow row;
        row.group = group;
        row.reference = kind;
        if (cfg.filter) row.tag = cfg.filter->label();
        row.flags.push_back("no binary ratings loaded");
        report.rows.push_back(std::move(row));
        continue;
      }
      report.rows.push_back(analyze_group(*data, cfg, group, kind));
    }
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const AnalysisRow& a, const AnalysisRow& b) {
    if (a.group.label() != b.group.label()) return a.group.label() < b.group.label();
    return static_cast<int>(a.reference) < static_cast<int>(b.reference);
  });
  for (const auto& row : report.rows) {
    if (!row.defined) {
      report.warnings.push_back("row " + row.group.label() + "/" +
                                to_string(row.reference) + " undefined: " +
                                (row.flags.empty() ? "?" : row.flags.front()));
    }
  }
  return report;
}

namespace detail {

inline nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return round9(*v);
}

inline nlohmann::ordered_json interval_json(const IntervalResult& iv) {
  nlohmann::ordered_json j;
  j["point"] = round9(iv.point);
  j["lo"] = iv.lo ? nlohmann::ordered_json(round9(*iv.lo)) : nlohmann::ordered_json(nullptr);
  j["hi"] = iv.hi ? nlohmann::ordered_json(round9(*iv.hi)) : nlohmann::ordered_json(nullptr);
  j["trials"] = iv.trials;
  j["undefined_trials"] = iv.undefined_trials;
  return j;
}

}  // namespace detail

inline nlohmann::ordered_json report_json(const MetricsReport& report, const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  nlohmann::ordered_json run;
  run["version"] = kVersion;
  run["seed"] = cfg.seed;
  run["config_hash"] = config_hash_hex(canonical_config(cfg));
  j["run"] = run;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json r;
    r["group"] = row.group.label();
    nlohmann::ordered_json sel;
    for (const auto& [axis, value] : row.group.selectors) sel[axis] = value;
    r["selectors"] = sel;
    r["reference"] = to_string(row.reference);
    r["tag"] = row.tag ? nlohmann::ordered_json(*row.tag) : nlohmann::ordered_json(nullptr);
    r["defined"] = row.defined;
    r["flags"] = row.flags;
    r["raters"] = row.raters;
    r["items"] = row.items;
    r["pair_count"] = row.resp.pair_count;
    r["dropped_items"] = row.dropped_items;
    if (row.defined) {
      r["mpa"] = round9(row.resp.mpa);
      r["wra"] = round9(row.resp.wra);
      r["hm"] = round9(row.resp.hm);
      if (row.reference == ReferenceKind::crowd) {
        nlohmann::ordered_json pb = nlohmann::ordered_json::array();
        for (const auto& bm : row.resp.per_boundary) {
          nlohmann::ordered_json e;
          e["t"] = bm.boundary ? nlohmann::ordered_json(*bm.boundary)
                               : nlohmann::ordered_json(nullptr);
          e["mpa"] = round9(bm.mpa);
          e["wra"] = round9(bm.wra);
          e["hm"] = round9(bm.hm);
          e["pair_count"] = bm.pair_count;
          pb.push_back(e);
        }
        r["per_boundary"] = pb;
        r["defined_boundaries"] = row.defined_boundaries;
      }
      nlohmann::ordered_json base;
      base["tau_b"] = detail::opt_json(row.base.tau_b);
      base["tau_a"] = detail::opt_json(row.base.tau_a);
      base["spearman_rho"] = detail::opt_json(row.base.spearman_rho);
      base["auroc"] = detail::opt_json(row.base.auroc);
      base["aucpr"] = detail::opt_json(row.base.aucpr);
      base["mokken_h"] = detail::opt_json(row.base.mokken_h);
      base["irt_alpha"] = nullptr;  // reserved for externally computed values
      r["baselines"] = base;
      nlohmann::ordered_json cis;
      for (const auto& entry : row.cis) cis[entry.metric] = detail::interval_json(entry.interval);
      r["ci"] = cis;
    }
    rows.push_back(std::move(r));
  }
  j["rows"] = rows;
  return j;
}

inline std::string report_csv(const MetricsReport& report) {
  std::ostringstream os;
  os << "group,reference,tag,defined,raters,items,pair_count,mpa,wra,hm,"
        "mpa_lo,mpa_hi,wra_lo,wra_hi,hm_lo,hm_hi,"
        "tau_b,tau_a,spearman_rho,auroc,aucpr,mokken_h\n";
  const auto opt = [](const std::optional<double>& v) {
    return v ? format9(round9(*v)) : std::string();
  };
  for (const auto& row : report.rows) {
    std::optional<double> lo9[3], hi9[3];
    for (const auto& entry : row.cis) {
      int slot = entry.metric == "mpa" ? 0 : entry.metric == "wra" ? 1
                 : entry.metric == "hm" ? 2 : -1;
      if (slot >= 0) {
        lo9[slot] = entry.interval.lo;
        hi9[slot] = entry.interval.hi;
      }
    }
    std::vector<std::string> fields{
        row.group.label(),
        to_string(row.reference),
        row.tag.value_or(""),
        row.defined ? "true" : "false",
        std::to_string(row.raters),
        std::to_string(row.items),
        std::to_string(row.resp.pair_count),
        row.defined ? format9(round9(row.resp.mpa)) : "",
        row.defined ? format9(round9(row.resp.wra)) : "",
        row.defined ? format9(round9(row.resp.hm)) : "",
        opt(lo9[0]), opt(hi9[0]), opt(lo9[1]), opt(hi9[1]), opt(lo9[2]), opt(hi9[2]),
        opt(row.base.tau_b), opt(row.base.tau_a), opt(row.base.spearman_rho),
        opt(row.base.auroc), opt(row.base.aucpr), opt(row.base.mokken_h)};
    csv::write_line(os, fields);
  }
  return os.str();
}

// ---- compare ----------------------------------------------------------

// Group metric for permutation testing: the full pipeline (aggregation,
// reference construction, metric) recomputed for an arbitrary rater set.
inline std::function<std::optional<double>(const std::set<std::string>&)> pipeline_metric(
    const Dataset& data, const RunConfig& cfg, const std::string& metric) {
  const auto kernels = detail::ci_kernels();
  if (!kernels.contains(metric)) {
    throw ValidationError("unknown metric '" + metric + "'");
  }
  const auto kernel = kernels.at(metric);
  const LikertScale scale = data.table.scale();
  return [&data, cfg, kernel, scale](const std::set<std::string>& raters)
             -> std::optional<double> {
    try {
      const auto scores = aggregate(data.table, raters, cfg.aggregation);
      if (scores.size() == 0) return std::nullopt;
      if (cfg.reference == ReferenceChoice::guideline) {
        const auto pairs =
            guideline_pairs(scores, data.binary, scale, "", cfg.collapse_majority);
        return kernel(pairs);
      }
      std::vector<std::optional<double>> values;
      for (const auto& b : all_boundaries(scale)) {
        values.push_back(
            kernel(crowd_pairs(data.table, raters, scores, b, "", cfg.aggregate_reference)));
      }
      int n = 0;
      return detail::macro_optional(values, n);
    } catch (const ValidationError&) {
      return std::nullopt;
    }
  };
}

struct CompareResult {
  std::string metric;
  GroupKey group_a;
  GroupKey group_b;
  PermutationResult perm;
};

inline CompareResult run_compare(const Dataset& data_full, const RunConfig& cfg,
                                 const GroupKey& a, const GroupKey& b,
                                 const std::string& metric) {
  if (cfg.reference == ReferenceChoice::both) {
    throw ValidationError("compare needs reference set to guideline or crowd");
  }
  const Dataset* data = &data_full;
  Dataset filtered;
  if (cfg.filter) {
    filtered = filter_dataset(data_full, *cfg.filter, data_full.table.scale());
    data = &filtered;
  }
  const auto raters_a = select_raters(data->attributes, a);
  const auto raters_b = select_raters(data->attributes, b);
  CompareResult out;
  out.metric = metric;
  out.group_a = a;
  out.group_b = b;
  out.perm = permutation_test(pipeline_metric(*data, cfg, metric), raters_a, raters_b,
                              cfg.resample, cfg.workers);
  return out;
}

// ---- curves ------------------------------------------------------------

struct CurveSet {
  std::optional<int> boundary;
  std::vector<CurvePoints> curves;
};

inline std::vector<CurveSet> run_curves(const Dataset& data_full, const RunConfig& cfg,
                                        const GroupKey& group) {
  const Dataset* data = &data_full;
  Dataset filtered;
  if (cfg.filter) {
    filtered = filter_dataset(data_full, *cfg.filter, data_full.table.scale());
    data = &filtered;
  }
  const auto raters = select_raters(data->attributes, group);
  if (raters.empty()) throw ValidationError("no raters match group " + group.label());
  const auto scores = aggregate(data->table, raters, cfg.aggregation);
  const LikertScale scale = data->table.scale();
  std::vector<CurveSet> out;
  if (cfg.reference != ReferenceChoice::crowd) {
    const auto pairs =
        guideline_pairs(scores, data->binary, scale, group.label(), cfg.collapse_majority);
    const auto r = evaluate_unit(pairs, true);
    out.push_back({std::nullopt, r.per_boundary.front().curves});
  }
  if (cfg.reference != ReferenceChoice::guideline) {
    for (const auto& b : all_boundaries(scale)) {
      const auto pairs =
          crowd_pairs(data->table, raters, scores, b, group.label(), cfg.aggregate_reference);
      const auto r = evaluate_unit(pairs, true);
      out.push_back({b.t, r.per_boundary.front().curves});
    }
  }
  return out;
}

// One pair set per file: `kind,s,y` with empty cells at undefined points.
inline std::string curves_csv(const CurveSet& set) {
  std::ostringstream os;
  os << "kind,s,y\n";
  for (const auto& curve : set.curves) {
    for (std::size_t i = 0; i < curve.xs.size(); ++i) {
      csv::write_line(os, {to_string(curve.kind), std::to_string(curve.xs[i]),
                           curve.ys[i] ? format9(round9(*curve.ys[i])) : ""});
    }
  }
  return os.str();
}

// ---- rater selection ----------------------------------------------------

struct RaterRanking {
  std::string rater_id;
  double mpa = 0.0;
  double wra = 0.0;
  double hm = 0.0;
  std::int64_t pair_count = 0;
  bool selected = false;
  bool tied = false;
};

struct GroupSelection {
  GroupKey group;
  std::vector<RaterRanking> rankings;  // descending hm
  bool shortfall = false;
  std::vector<std::string> flags;
};

// Ranks the raters of each group by their individual responsiveness against
// the crowd reference (the rater excluded), macro-averaged over boundaries.
inline std::vector<GroupSelection> run_select_raters(const Dataset& data_full,
                                                     const RunConfig& cfg, int per_group) {
  if (per_group < 1) throw ValidationError("per_group must be >= 1");
  const Dataset* data = &data_full;
  Dataset filtered;
  if (cfg.filter) {
    filtered = filter_dataset(data_full, *cfg.filter, data_full.table.scale());
    data = &filtered;
  }
  const LikertScale scale = data->table.scale();
  std::vector<GroupSelection> out;
  for (const auto& group : resolve_groups(cfg, data->attributes)) {
    GroupSelection sel;
    sel.group = group;
    const auto raters = select_raters(data->attributes, group);
    if (raters.empty()) {
      sel.flags.push_back("no raters match group");
      out.push_back(std::move(sel));
      continue;
    }
    std::vector<std::string> ordered(raters.begin(), raters.end());
    std::vector<RaterRanking> rankings(ordered.size());
    parallel_for(ordered.size(), cfg.workers, [&](std::size_t i) {
      RaterRanking r;
      r.rater_id = ordered[i];
      try {
        GroupScoreTable unit;
        for (const auto& rec : data->table.records()) {
          if (rec.rater_id == r.rater_id) unit.entries[rec.item_id] = {rec.score, 1};
        }
        if (unit.size() == 0) throw ValidationError("rater has no ratings");
        std::vector<ReferencePairSet> sets;
        for (const auto& b : all_boundaries(scale)) {
          sets.push_back(crowd_pairs(data->table, {r.rater_id}, unit, b, r.rater_id,
                                     cfg.aggregate_reference));
        }
        const auto resp = evaluate_unit(sets);
        r.mpa = resp.mpa;
        r.wra = resp.wra;
        r.hm = resp.hm;
        r.pair_count = resp.pair_count;
      } catch (const ValidationError&) {
        r.hm = -1.0;  // sorts last, flagged below
      }
      rankings[i] = std::move(r);
    });
    std::stable_sort(rankings.begin(), rankings.end(),
                     [](const RaterRanking& a, const RaterRanking& b) {
                       if (a.hm != b.hm) return a.hm > b.hm;
                       return a.rater_id < b.rater_id;
                     });
    const int n = static_cast<int>(rankings.size());
    if (n < per_group) sel.shortfall = true;
    const int cut = std::min(per_group, n);
    for (int i = 0; i < n; ++i) {
      rankings[i].selected = i < cut;
    }
    // ties with the cutoff value are kept, flagged
    if (cut > 0 && cut < n) {
      const double edge = round9(rankings[cut - 1].hm);
      for (int i = cut; i < n && round9(rankings[i].hm) == edge; ++i) {
        rankings[i].selected = true;
        rankings[i].tied = true;
        rankings[cut - 1].tied = true;
      }
    }
    sel.rankings = std::move(rankings);
    out.push_back(std::move(sel));
  }
  return out;
}

}  // namespace ordmet
