// Command-line front end: validate inputs, compute responsiveness reports,
// compare groups, export curves, run the synthetic scenario study, and rank
// raters within groups.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ordmet/analysis.hpp"
#include "ordmet/report.hpp"
#include "ordmet/simulation.hpp"
#include "ordmet/svg.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitWarnings = 1;
constexpr int kExitInputError = 2;

struct GlobalOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  int workers = 1;
};

ordmet::RunConfig make_run_config(const GlobalOpts& g) {
  ordmet::RunConfig cfg = ordmet::load_run_config(g.config_path);
  if (g.seed) ordmet::override_seed(cfg, *g.seed);
  if (g.out_dir) cfg.out_dir = *g.out_dir;
  cfg.workers = g.workers;
  std::filesystem::create_directories(cfg.out_dir);
  return cfg;
}

nlohmann::ordered_json error_json(const ordmet::CsvError& e) {
  nlohmann::ordered_json j;
  j["file"] = e.file();
  j["line"] = e.line();
  j["message"] = e.what();
  return j;
}

int cmd_validate(const GlobalOpts& g) {
  nlohmann::ordered_json diag;
  nlohmann::ordered_json errors = nlohmann::ordered_json::array();
  nlohmann::ordered_json warnings = nlohmann::ordered_json::array();
  try {
    const auto cfg = make_run_config(g);
    const auto data = ordmet::load_dataset(cfg);
    for (const auto& w : data.warnings) warnings.push_back(w);

    nlohmann::ordered_json summary;
    summary["scale_k_max"] = cfg.k_max;
    summary["rating_records"] = data.table.size();
    summary["items"] = data.table.item_ids().size();
    summary["raters"] = data.table.rater_ids().size();
    summary["binary_records"] = data.binary.size();
    summary["attribute_raters"] = data.attributes.size();
    summary["item_meta"] = data.items.size();
    summary["guideline_reference_available"] = !data.binary.empty();

    nlohmann::ordered_json groups = nlohmann::ordered_json::array();
    for (const auto& key : ordmet::resolve_groups(cfg, data.attributes)) {
      nlohmann::ordered_json gj;
      gj["group"] = key.label();
      const auto raters = ordmet::select_raters(data.attributes, key);
      gj["raters"] = raters.size();
      std::size_t rated_items = 0;
      for (const auto& item : data.table.item_ids()) {
        for (const auto& rec : data.table.item_ratings(item)) {
          if (raters.contains(rec.rater_id)) {
            ++rated_items;
            break;
          }
        }
      }
      gj["items_rated"] = rated_items;
      if (raters.empty()) warnings.push_back("group has no raters: " + key.label());
      groups.push_back(gj);
    }
    summary["groups"] = groups;
    diag["summary"] = summary;
  } catch (const ordmet::CsvError& e) {
    errors.push_back(error_json(e));
  } catch (const std::exception& e) {
    nlohmann::ordered_json j;
    j["message"] = e.what();
    errors.push_back(j);
  }
  diag["errors"] = errors;
  diag["warnings"] = warnings;
  diag["status"] = !errors.empty() ? "error" : (!warnings.empty() ? "warnings" : "ok");
  std::cout << ordmet::dump_json(diag);
  if (!errors.empty()) return kExitInputError;
  return warnings.empty() ? kExitOk : kExitWarnings;
}

int cmd_metrics(const GlobalOpts& g) {
  const auto cfg = make_run_config(g);
  const auto data = ordmet::load_dataset(cfg);
  const auto report = ordmet::run_metrics(data, cfg);
  const auto j = ordmet::report_json(report, cfg);
  ordmet::write_text_file(cfg.out_dir + "/report.json", ordmet::dump_json(j));
  ordmet::write_text_file(cfg.out_dir + "/report.csv", ordmet::report_csv(report));
  std::size_t defined = 0;
  for (const auto& row : report.rows) defined += row.defined ? 1 : 0;
  std::cout << "wrote " << cfg.out_dir << "/report.json (" << report.rows.size() << " rows, "
            << defined << " defined)\n";
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  return report.warnings.empty() ? kExitOk : kExitWarnings;
}

int cmd_compare(const GlobalOpts& g, const std::string& group_a, const std::string& group_b,
                const std::string& metric) {
  const auto cfg = make_run_config(g);
  const auto data = ordmet::load_dataset(cfg);
  const auto result = ordmet::run_compare(data, cfg, ordmet::parse_group_label(group_a),
                                          ordmet::parse_group_label(group_b), metric);
  nlohmann::ordered_json j;
  j["schema_version"] = ordmet::kReportSchemaVersion;
  j["metric"] = result.metric;
  j["group_a"] = result.group_a.label();
  j["group_b"] = result.group_b.label();
  j["observed_diff"] = ordmet::round9(result.perm.observed_diff);
  j["p_value"] = ordmet::round9(result.perm.p_value);
  j["permutations"] = result.perm.permutations;
  j["undefined_permutations"] = result.perm.undefined_permutations;
  ordmet::write_text_file(cfg.out_dir + "/comparison.json", ordmet::dump_json(j));
  std::printf("%s: %s vs %s: diff %+.6f, p = %.6f (%d permutations)\n", metric.c_str(),
              result.group_a.label().c_str(), result.group_b.label().c_str(),
              result.perm.observed_diff, result.perm.p_value, result.perm.permutations);
  return kExitOk;
}

int cmd_curves(const GlobalOpts& g, const std::string& group_label) {
  const auto cfg = make_run_config(g);
  const auto data = ordmet::load_dataset(cfg);
  const auto group = ordmet::parse_group_label(group_label);
  const auto sets = ordmet::run_curves(data, cfg, group);
  for (const auto& set : sets) {
    const std::string suffix = set.boundary ? "_t" + std::to_string(*set.boundary) : "";
    ordmet::write_text_file(cfg.out_dir + "/curves" + suffix + ".csv", ordmet::curves_csv(set));
    for (const auto& curve : set.curves) {
      const std::string kind = ordmet::to_string(curve.kind);
      const std::string title = group.label() + ": " + kind +
                                (set.boundary ? " (boundary " + std::to_string(*set.boundary) + ")"
                                              : "");
      ordmet::write_text_file(cfg.out_dir + "/curves" + suffix + "_" + kind + ".svg",
                              ordmet::curve_svg(curve, title));
    }
  }
  std::cout << "wrote " << cfg.out_dir << "/curves csv and SVG charts\n";
  return kExitOk;
}

ordmet::SimulationConfig load_sim_config(const std::string& path) {
  ordmet::SimulationConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  const auto j = nlohmann::ordered_json::parse(in);
  cfg.n_items = j.value("n_items", cfg.n_items);
  cfg.n_crowd = j.value("n_crowd", cfg.n_crowd);
  cfg.n_trained = j.value("n_trained", cfg.n_trained);
  cfg.k_max = j.value("k_max", cfg.k_max);
  cfg.sigma_b = j.value("sigma_b", cfg.sigma_b);
  cfg.shift_proportion = j.value("shift_proportion", cfg.shift_proportion);
  cfg.conservative_quantile = j.value("conservative_quantile", cfg.conservative_quantile);
  cfg.trained_percentile_mean = j.value("trained_percentile_mean", cfg.trained_percentile_mean);
  cfg.trained_percentile_sd = j.value("trained_percentile_sd", cfg.trained_percentile_sd);
  cfg.trained_percentile_lo = j.value("trained_percentile_lo", cfg.trained_percentile_lo);
  cfg.trained_percentile_hi = j.value("trained_percentile_hi", cfg.trained_percentile_hi);
  cfg.perception_noise_sd = j.value("perception_noise_sd", cfg.perception_noise_sd);
  cfg.bootstrap_trials = j.value("bootstrap_trials", cfg.bootstrap_trials);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

nlohmann::ordered_json sim_config_json(const ordmet::SimulationConfig& cfg) {
  nlohmann::ordered_json j;
  j["n_items"] = cfg.n_items;
  j["n_crowd"] = cfg.n_crowd;
  j["n_trained"] = cfg.n_trained;
  j["k_max"] = cfg.k_max;
  j["sigma_b"] = ordmet::round9(cfg.sigma_b);
  j["shift_proportion"] = ordmet::round9(cfg.shift_proportion);
  j["conservative_quantile"] = ordmet::round9(cfg.conservative_quantile);
  j["trained_percentile_mean"] = ordmet::round9(cfg.trained_percentile_mean);
  j["trained_percentile_sd"] = ordmet::round9(cfg.trained_percentile_sd);
  j["trained_percentile_lo"] = ordmet::round9(cfg.trained_percentile_lo);
  j["trained_percentile_hi"] = ordmet::round9(cfg.trained_percentile_hi);
  j["perception_noise_sd"] = ordmet::round9(cfg.perception_noise_sd);
  j["bootstrap_trials"] = cfg.bootstrap_trials;
  j["seed"] = cfg.seed;
  return j;
}

int cmd_simulate(const GlobalOpts& g) {
  ordmet::SimulationConfig cfg = load_sim_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  const std::string out_dir = g.out_dir.value_or(".");
  std::filesystem::create_directories(out_dir);

  const auto world = ordmet::generate_world(cfg);
  const auto binary = ordmet::trained_reference(world);
  {
    std::ofstream os(out_dir + "/binary.csv", std::ios::binary);
    ordmet::save_binary(os, binary);
  }
  for (const auto pattern :
       {ordmet::ScoringPattern::normal, ordmet::ScoringPattern::downward_shift,
        ordmet::ScoringPattern::conservative}) {
    std::ofstream os(out_dir + "/ratings_" + ordmet::to_string(pattern) + ".csv",
                     std::ios::binary);
    ordmet::save_ratings(os, ordmet::pattern_table(world, pattern));
  }

  const auto study = ordmet::run_scenarios(cfg, g.workers);
  nlohmann::ordered_json j;
  j["schema_version"] = ordmet::kReportSchemaVersion;
  j["run"] = sim_config_json(cfg);
  nlohmann::ordered_json scenarios = nlohmann::ordered_json::array();
  for (const auto& s : study.scenarios) {
    nlohmann::ordered_json sj;
    sj["pattern"] = ordmet::to_string(s.pattern);
    nlohmann::ordered_json means;
    nlohmann::ordered_json cis;
    for (const auto& name : ordmet::scenario_metric_names()) {
      means[name] = ordmet::round9(s.mean.at(name));
      const auto& iv = s.mean_ci.at(name);
      nlohmann::ordered_json ci;
      ci["lo"] = iv.lo ? nlohmann::ordered_json(ordmet::round9(*iv.lo))
                       : nlohmann::ordered_json(nullptr);
      ci["hi"] = iv.hi ? nlohmann::ordered_json(ordmet::round9(*iv.hi))
                       : nlohmann::ordered_json(nullptr);
      cis[name] = ci;
    }
    sj["means"] = means;
    sj["ci"] = cis;
    nlohmann::ordered_json per_rater = nlohmann::ordered_json::array();
    for (const auto& r : s.per_rater) {
      nlohmann::ordered_json rj;
      rj["rater_id"] = r.rater_id;
      rj["mpa"] = ordmet::round9(r.mpa);
      rj["wra"] = ordmet::round9(r.wra);
      rj["hm"] = ordmet::round9(r.hm);
      rj["tau_b"] = r.tau_b ? nlohmann::ordered_json(ordmet::round9(*r.tau_b))
                            : nlohmann::ordered_json(nullptr);
      rj["tau_a"] = r.tau_a ? nlohmann::ordered_json(ordmet::round9(*r.tau_a))
                            : nlohmann::ordered_json(nullptr);
      rj["spearman_rho"] = r.spearman_rho
                               ? nlohmann::ordered_json(ordmet::round9(*r.spearman_rho))
                               : nlohmann::ordered_json(nullptr);
      rj["auroc"] = r.auroc ? nlohmann::ordered_json(ordmet::round9(*r.auroc))
                            : nlohmann::ordered_json(nullptr);
      rj["aucpr"] = r.aucpr ? nlohmann::ordered_json(ordmet::round9(*r.aucpr))
                            : nlohmann::ordered_json(nullptr);
      rj["pair_count"] = r.pair_count;
      per_rater.push_back(rj);
    }
    sj["per_rater"] = per_rater;
    scenarios.push_back(sj);
  }
  j["scenarios"] = scenarios;
  ordmet::write_text_file(out_dir + "/scenario_metrics.json", ordmet::dump_json(j));
  std::cout << "wrote " << out_dir << "/scenario_metrics.json and scenario datasets\n";
  return kExitOk;
}

int cmd_select_raters(const GlobalOpts& g, int per_group) {
  const auto cfg = make_run_config(g);
  const auto data = ordmet::load_dataset(cfg);
  const auto selections = ordmet::run_select_raters(data, cfg, per_group);
  nlohmann::ordered_json j;
  j["schema_version"] = ordmet::kReportSchemaVersion;
  j["per_group"] = per_group;
  nlohmann::ordered_json groups = nlohmann::ordered_json::array();
  bool warnings = false;
  for (const auto& sel : selections) {
    nlohmann::ordered_json gj;
    gj["group"] = sel.group.label();
    gj["flags"] = sel.flags;
    gj["shortfall"] = sel.shortfall;
    nlohmann::ordered_json raters = nlohmann::ordered_json::array();
    for (const auto& r : sel.rankings) {
      if (!r.selected) continue;
      nlohmann::ordered_json rj;
      rj["rater_id"] = r.rater_id;
      rj["mpa"] = ordmet::round9(r.mpa);
      rj["wra"] = ordmet::round9(r.wra);
      rj["hm"] = ordmet::round9(r.hm);
      rj["pair_count"] = r.pair_count;
      rj["tied"] = r.tied;
      raters.push_back(rj);
    }
    gj["selected"] = raters;
    groups.push_back(gj);
    if (!sel.flags.empty() || sel.shortfall) warnings = true;
    if (!sel.flags.empty()) {
      std::cerr << "warning: group " << sel.group.label() << ": " << sel.flags.front() << "\n";
    }
  }
  j["groups"] = groups;
  ordmet::write_text_file(cfg.out_dir + "/selection.json", ordmet::dump_json(j));
  std::cout << "wrote " << cfg.out_dir << "/selection.json\n";
  return warnings ? kExitWarnings : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Responsiveness metrics for ordinal safety ratings"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "JSON run configuration");
  std::uint64_t seed_val = 0;
  auto* seed_opt = app.add_option("--seed", seed_val, "master seed override");
  std::string out_val;
  auto* out_opt = app.add_option("--out", out_val, "output directory override");
  app.add_option("--workers", g.workers, "worker threads")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "check inputs and report coverage");
  auto* metrics = app.add_subcommand("metrics", "compute the responsiveness report");
  auto* compare = app.add_subcommand("compare", "permutation test between two groups");
  std::string group_a, group_b, metric = "hm";
  compare->add_option("--group-a", group_a, "first group (axis=value|...)")->required();
  compare->add_option("--group-b", group_b, "second group")->required();
  compare->add_option("--metric", metric, "metric to compare (mpa, wra, hm, tau_b, ...)");
  auto* curves = app.add_subcommand("curves", "export metric curves as CSV and SVG");
  std::string group_label = "all";
  curves->add_option("--group", group_label, "group to plot (axis=value|... or 'all')");
  auto* simulate = app.add_subcommand("simulate", "run the synthetic scenario study");
  auto* select = app.add_subcommand("select-raters", "rank raters within groups");
  int per_group = 1;
  select->add_option("--per-group", per_group, "raters to select per group")
      ->check(CLI::PositiveNumber);
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed_val;
  if (*out_opt) g.out_dir = out_val;

  try {
    if (app.got_subcommand(validate)) return cmd_validate(g);
    if (app.got_subcommand(metrics)) return cmd_metrics(g);
    if (app.got_subcommand(compare)) return cmd_compare(g, group_a, group_b, metric);
    if (app.got_subcommand(curves)) return cmd_curves(g, group_label);
    if (app.got_subcommand(simulate)) return cmd_simulate(g);
    if (app.got_subcommand(select)) return cmd_select_raters(g, per_group);
  } catch (const ordmet::CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
