#include "phishpanel/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "phishpanel/errors.hpp"

namespace phishpanel {

namespace {

std::string fmt6(double v) { return format_fixed(v, 6); }

struct ZP {
  std::string z, p;
};

ZP z_and_p(double coef, double se) {
  if (!(se > 0.0) || !std::isfinite(se) || !std::isfinite(coef)) return {"", ""};
  double z = coef / se;
  double p = 2.0 * normal_cdf(-std::fabs(z));
  return {fmt6(z), fmt6(p)};
}

void coef_rows(std::ostream& out, const FitResult& fit) {
  for (std::size_t j = 0; j < fit.names.size(); ++j) {
    double coef = fit.beta[static_cast<Eigen::Index>(j)];
    double se = fit.se(static_cast<int>(j));
    ZP zp = z_and_p(coef, se);
    write_csv_row(out, {"coef", fit.names[j], fmt6(coef), fmt6(se), zp.z, zp.p});
  }
}

std::string ape_label(const ApeEstimate& ape) {
  if (!ape.moderator_value) return "overall";
  return "at=" + fmt6(*ape.moderator_value);
}

void ape_rows(std::ostream& out, const ApeBlock& apes) {
  write_csv_row(out, {"ape", ape_label(apes.overall), fmt6(apes.overall.estimate),
                      fmt6(apes.overall.se), "", ""});
  for (const auto& g : apes.grid)
    write_csv_row(out, {"ape", ape_label(g), fmt6(g.estimate), fmt6(g.se),
                        g.outside_support ? "outside_support" : "", ""});
}

void stat_rows(std::ostream& out, const EstimateResult& result) {
  const FitResult& fit = result.fit;
  write_csv_row(out, {"stat", "observations", std::to_string(fit.n_obs), "", "", ""});
  write_csv_row(out, {"stat", "clusters", std::to_string(fit.n_clusters), "", "", ""});
  write_csv_row(out, {"stat", "log_pseudolikelihood", fmt6(fit.loglik), "", "", ""});
  write_csv_row(out, {"stat", "pseudo_r2", fmt6(fit.pseudo_r2), "", "", ""});
  write_csv_row(out, {"stat", "converged", fit.converged ? "1" : "0", "", "", ""});
  if (result.n_excluded > 0)
    write_csv_row(out, {"stat", "excluded_buffer_rows", std::to_string(result.n_excluded), "",
                        "", ""});
  for (const auto& w : result.warnings) write_csv_row(out, {"warning", w, "", "", "", ""});
  for (const auto& c : result.omitted_collinear)
    write_csv_row(out, {"omitted_collinear", c, "", "", "", ""});
}

nlohmann::json wald_json(const WaldResult& wald, const std::vector<std::string>& terms) {
  nlohmann::json j;
  j["statistic"] = wald.statistic;
  j["df"] = wald.df;
  j["p"] = wald.p_value;
  if (!terms.empty()) j["terms"] = terms;
  return j;
}

nlohmann::json estimate_payload(const EstimateResult& result) {
  nlohmann::json j;
  j["fit"] = fit_json(result.fit);
  j["apes"] = ape_json(result.apes);
  j["warnings"] = result.warnings;
  j["omitted_collinear"] = result.omitted_collinear;
  j["excluded_buffer_rows"] = result.n_excluded;
  return j;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data, std::uint64_t state) {
  for (unsigned char c : data) {
    state ^= c;
    state *= 1099511628211ull;
  }
  return state;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "' for digesting");
  std::uint64_t state = 14695981039346656037ull;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    state = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), state);
  return hex64(state);
}

std::string config_hash(const std::vector<std::pair<std::string, std::string>>& entries) {
  std::vector<std::pair<std::string, std::string>> sorted = entries;
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t state = 14695981039346656037ull;
  for (const auto& [key, value] : sorted) {
    state = fnv1a64(key, state);
    state = fnv1a64("=", state);
    state = fnv1a64(value, state);
    state = fnv1a64("\n", state);
  }
  return hex64(state);
}

void write_meta(std::ostream& out, const RunMeta& meta) {
  out << "# tool_version: " << kToolVersion << "\n";
  out << "# schema_version: " << kSchemaVersion << "\n";
  out << "# config_hash: " << meta.config_hash << "\n";
  if (meta.seed) out << "# seed: " << *meta.seed << "\n";
}

nlohmann::json meta_json(const RunMeta& meta) {
  nlohmann::json j;
  j["tool_version"] = std::string(kToolVersion);
  j["schema_version"] = kSchemaVersion;
  j["config_hash"] = meta.config_hash;
  if (meta.seed) j["seed"] = *meta.seed;
  return j;
}

std::string format_fixed(double value, int decimals) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

void write_similarity_csv(std::ostream& out, const SimilarityMatrix& matrix,
                          const RunMeta& meta) {
  write_meta(out, meta);
  out << "# metric: " << metric_name(matrix.metric) << "\n";
  out << "# layer: " << layer_name(matrix.layer) << "\n";
  std::vector<std::string> row;
  row.push_back("scenario_id");
  for (int id : matrix.scenario_ids) row.push_back(std::to_string(id));
  write_csv_row(out, row);
  for (std::size_t i = 0; i < matrix.scenario_ids.size(); ++i) {
    row.clear();
    row.push_back(std::to_string(matrix.scenario_ids[i]));
    for (std::size_t j = 0; j < matrix.scenario_ids.size(); ++j)
      row.push_back(format_fixed(matrix.values[i][j], 2));
    write_csv_row(out, row);
  }
}

void write_top_pairs_csv(std::ostream& out, const std::vector<ScenarioPair>& pairs,
                         const RunMeta& meta) {
  write_meta(out, meta);
  write_csv_row(out, {"scenario_a", "scenario_b", "similarity", "shared", "union_size"});
  for (const auto& p : pairs)
    write_csv_row(out, {std::to_string(p.scenario_a), std::to_string(p.scenario_b),
                        format_fixed(p.similarity, 2), std::to_string(p.shared),
                        std::to_string(p.union_size)});
}

nlohmann::json similarity_json(const SimilarityMatrix& matrix,
                               const std::vector<ScenarioPair>& pairs, const RunMeta& meta) {
  nlohmann::json j = meta_json(meta);
  j["metric"] = metric_name(matrix.metric);
  j["layer"] = layer_name(matrix.layer);
  j["scenario_ids"] = matrix.scenario_ids;
  j["values"] = matrix.values;
  nlohmann::json jp = nlohmann::json::array();
  for (const auto& p : pairs) {
    nlohmann::json e;
    e["scenario_a"] = p.scenario_a;
    e["scenario_b"] = p.scenario_b;
    e["similarity"] = p.similarity;
    e["shared"] = p.shared;
    e["union_size"] = p.union_size;
    jp.push_back(std::move(e));
  }
  j["top_pairs"] = std::move(jp);
  return j;
}

void write_weights_csv(std::ostream& out, const PanelDataset& panel, const WeightSet& weights,
                       const RunMeta& meta) {
  write_meta(out, meta);
  write_csv_row(out, {"employee_id", "campaign_id", "sw", "sw_trimmed"});
  for (std::size_t i = 0; i < panel.exposures.size(); ++i) {
    const Exposure& e = panel.exposures[i];
    write_csv_row(out, {panel.employees[static_cast<std::size_t>(e.employee)].id,
                        std::to_string(e.campaign_id), fmt6(weights.sw[i]),
                        fmt6(weights.sw_trimmed[i])});
  }
}

namespace {

void summary_rows(std::ostream& out, const std::string& section, const WeightSummary& s) {
  write_csv_row(out, {section, "mean", fmt6(s.mean), "", ""});
  write_csv_row(out, {section, "sd", fmt6(s.sd), "", ""});
  write_csv_row(out, {section, "min", fmt6(s.min), "", ""});
  write_csv_row(out, {section, "p1", fmt6(s.p1), "", ""});
  write_csv_row(out, {section, "p5", fmt6(s.p5), "", ""});
  write_csv_row(out, {section, "p50", fmt6(s.p50), "", ""});
  write_csv_row(out, {section, "p95", fmt6(s.p95), "", ""});
  write_csv_row(out, {section, "p99", fmt6(s.p99), "", ""});
  write_csv_row(out, {section, "max", fmt6(s.max), "", ""});
}

void histogram_rows(std::ostream& out, const std::string& section,
                    const std::vector<HistogramBin>& bins) {
  for (std::size_t i = 0; i < bins.size(); ++i)
    write_csv_row(out, {section, "bin_" + std::to_string(i), fmt6(bins[i].left),
                        fmt6(bins[i].right), std::to_string(bins[i].count)});
}

nlohmann::json summary_json(const WeightSummary& s) {
  nlohmann::json j;
  j["mean"] = s.mean;
  j["sd"] = s.sd;
  j["min"] = s.min;
  j["p1"] = s.p1;
  j["p5"] = s.p5;
  j["p50"] = s.p50;
  j["p95"] = s.p95;
  j["p99"] = s.p99;
  j["max"] = s.max;
  return j;
}

nlohmann::json histogram_json(const std::vector<HistogramBin>& bins) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& b : bins) {
    nlohmann::json e;
    e["left"] = b.left;
    e["right"] = b.right;
    e["count"] = b.count;
    j.push_back(std::move(e));
  }
  return j;
}

}  // namespace

void write_weight_diagnostics_csv(std::ostream& out, const WeightDiagnostics& diagnostics,
                                  const RunMeta& meta) {
  write_meta(out, meta);
  write_csv_row(out, {"section", "name", "value_1", "value_2", "value_3"});
  write_csv_row(out, {"counts", "n", std::to_string(diagnostics.n), "", ""});
  write_csv_row(out, {"counts", "capped_low", std::to_string(diagnostics.capped_low), "", ""});
  write_csv_row(out, {"counts", "capped_high", std::to_string(diagnostics.capped_high), "", ""});
  write_csv_row(out, {"counts", "lower_cutoff", fmt6(diagnostics.lower_cutoff), "", ""});
  write_csv_row(out, {"counts", "upper_cutoff", fmt6(diagnostics.upper_cutoff), "", ""});
  summary_rows(out, "raw", diagnostics.raw);
  summary_rows(out, "trimmed", diagnostics.trimmed);
  histogram_rows(out, "hist_raw", diagnostics.raw_histogram);
  histogram_rows(out, "hist_trimmed", diagnostics.trimmed_histogram);
}

nlohmann::json weight_diagnostics_json(const WeightDiagnostics& diagnostics,
                                       const RunMeta& meta) {
  nlohmann::json j = meta_json(meta);
  j["n"] = diagnostics.n;
  j["capped_low"] = diagnostics.capped_low;
  j["capped_high"] = diagnostics.capped_high;
  j["lower_cutoff"] = diagnostics.lower_cutoff;
  j["upper_cutoff"] = diagnostics.upper_cutoff;
  j["raw"] = summary_json(diagnostics.raw);
  j["trimmed"] = summary_json(diagnostics.trimmed);
  j["raw_histogram"] = histogram_json(diagnostics.raw_histogram);
  j["trimmed_histogram"] = histogram_json(diagnostics.trimmed_histogram);
  return j;
}

nlohmann::json fit_json(const FitResult& fit) {
  nlohmann::json j;
  j["model"] = fit.model;
  j["link"] = link_name(fit.link);
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["observations"] = fit.n_obs;
  j["clusters"] = fit.n_clusters;
  j["log_pseudolikelihood"] = fit.loglik;
  j["null_log_pseudolikelihood"] = fit.null_loglik;
  j["pseudo_r2"] = fit.pseudo_r2;
  j["clamped_at_optimum"] = fit.clamped_at_optimum;
  j["step_underflow"] = fit.step_underflow;
  nlohmann::json coefs = nlohmann::json::array();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    nlohmann::json c;
    c["term"] = fit.names[i];
    c["coefficient"] = fit.beta[static_cast<Eigen::Index>(i)];
    double se = fit.se(static_cast<int>(i));
    c["se"] = se;
    if (se > 0.0 && std::isfinite(se)) {
      double z = fit.beta[static_cast<Eigen::Index>(i)] / se;
      c["z"] = z;
      c["p"] = 2.0 * normal_cdf(-std::fabs(z));
    }
    coefs.push_back(std::move(c));
  }
  j["coefficients"] = std::move(coefs);
  return j;
}

nlohmann::json ape_json(const ApeBlock& apes) {
  nlohmann::json j;
  j["weighted_average"] = apes.weighted_average;
  nlohmann::json overall;
  overall["estimate"] = apes.overall.estimate;
  overall["se"] = apes.overall.se;
  j["overall"] = std::move(overall);
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& g : apes.grid) {
    nlohmann::json e;
    e["moderator"] = g.moderator_value ? nlohmann::json(*g.moderator_value) : nlohmann::json();
    e["estimate"] = g.estimate;
    e["se"] = g.se;
    e["outside_support"] = g.outside_support;
    grid.push_back(std::move(e));
  }
  j["grid"] = std::move(grid);
  return j;
}

void write_estimate_csv(std::ostream& out, const EstimateResult& result, const RunMeta& meta) {
  write_meta(out, meta);
  write_csv_row(out, {"row", "term", "value_1", "value_2", "z", "p"});
  coef_rows(out, result.fit);
  ape_rows(out, result.apes);
  stat_rows(out, result);
}

nlohmann::json estimate_json(const EstimateResult& result, const RunMeta& meta) {
  nlohmann::json j = meta_json(meta);
  j.update(estimate_payload(result));
  return j;
}

void write_progression_csv(std::ostream& out, const ProgressionReport& report,
                           const RunMeta& meta) {
  write_meta(out, meta);
  write_csv_row(out, {"estimator", "addresses_heterogeneity", "addresses_feedback",
                      "coefficient", "se", "ape", "ape_se", "observations", "clusters",
                      "error"});
  for (const auto& col : report.columns) {
    if (!col.result) {
      write_csv_row(out, {col.name, col.addresses_heterogeneity ? "1" : "0",
                          col.addresses_feedback ? "1" : "0", "", "", "", "", "", "",
                          col.error});
      continue;
    }
    const EstimateResult& r = *col.result;
    int t = r.layout.treatment_column;
    write_csv_row(out, {col.name, col.addresses_heterogeneity ? "1" : "0",
                        col.addresses_feedback ? "1" : "0", fmt6(r.fit.beta[t]),
                        fmt6(r.fit.se(t)), fmt6(r.apes.overall.estimate),
                        fmt6(r.apes.overall.se), std::to_string(r.fit.n_obs),
                        std::to_string(r.fit.n_clusters), ""});
  }
}

nlohmann::json progression_json(const ProgressionReport& report, const RunMeta& meta) {
  nlohmann::json j = meta_json(meta);
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& col : report.columns) {
    nlohmann::json c;
    c["estimator"] = col.name;
    c["addresses_heterogeneity"] = col.addresses_heterogeneity;
    c["addresses_feedback"] = col.addresses_feedback;
    if (col.result) {
      c.update(estimate_payload(*col.result));
      int t = col.result->layout.treatment_column;
      c["treatment_coefficient"] = col.result->fit.beta[t];
      c["treatment_se"] = col.result->fit.se(t);
    } else {
      c["error"] = col.error;
    }
    cols.push_back(std::move(c));
  }
  j["columns"] = std::move(cols);
  return j;
}

void write_suite_csv(std::ostream& out, const SuiteResult& suite, const RunMeta& meta) {
  write_meta(out, meta);
  out << "# suite: " << suite_name(suite.suite) << "\n";
  write_csv_row(out, {"model", "row", "term", "value_1", "value_2", "value_3", "value_4"});
  auto emit_model = [&](const std::string& model, const EstimateResult& r) {
    for (std::size_t j = 0; j < r.fit.names.size(); ++j) {
      double coef = r.fit.beta[static_cast<Eigen::Index>(j)];
      double se = r.fit.se(static_cast<int>(j));
      ZP zp = z_and_p(coef, se);
      write_csv_row(out, {model, "coef", r.fit.names[j], fmt6(coef), fmt6(se), zp.z, zp.p});
    }
    write_csv_row(out, {model, "ape", ape_label(r.apes.overall), fmt6(r.apes.overall.estimate),
                        fmt6(r.apes.overall.se), "", ""});
    for (const auto& g : r.apes.grid)
      write_csv_row(out, {model, "ape", ape_label(g), fmt6(g.estimate), fmt6(g.se),
                          g.outside_support ? "outside_support" : "", ""});
    write_csv_row(out, {model, "stat", "observations", std::to_string(r.fit.n_obs), "", "", ""});
    write_csv_row(out, {model, "stat", "clusters", std::to_string(r.fit.n_clusters), "", "", ""});
    write_csv_row(out, {model, "stat", "log_pseudolikelihood", fmt6(r.fit.loglik), "", "", ""});
    write_csv_row(out, {model, "stat", "pseudo_r2", fmt6(r.fit.pseudo_r2), "", "", ""});
    if (r.n_excluded > 0)
      write_csv_row(out, {model, "stat", "excluded_buffer_rows", std::to_string(r.n_excluded),
                          "", "", ""});
    for (const auto& w : r.warnings) write_csv_row(out, {model, "warning", w, "", "", "", ""});
    for (const auto& c : r.omitted_collinear)
      write_csv_row(out, {model, "omitted_collinear", c, "", "", "", ""});
  };
  emit_model("main", suite.main);
  for (const auto& single : suite.singles) emit_model("single:" + single.label, single.result);
  if (suite.joint_interactions) {
    std::string terms;
    for (const auto& t : suite.joint_terms) terms += (terms.empty() ? "" : ";") + t;
    write_csv_row(out, {"main", "wald", "joint_interactions",
                        fmt6(suite.joint_interactions->statistic),
                        std::to_string(suite.joint_interactions->df),
                        fmt6(suite.joint_interactions->p_value), terms});
  }
  if (suite.engagement_equality)
    write_csv_row(out, {"main", "wald", "arm_equality",
                        fmt6(suite.engagement_equality->statistic),
                        std::to_string(suite.engagement_equality->df),
                        fmt6(suite.engagement_equality->p_value), ""});
  for (const auto& [name, block] : suite.extra_apes)
    write_csv_row(out, {"main", "arm_ape", name, fmt6(block.overall.estimate),
                        fmt6(block.overall.se), "", ""});
}

nlohmann::json suite_json(const SuiteResult& suite, const RunMeta& meta) {
  nlohmann::json j = meta_json(meta);
  j["suite"] = suite_name(suite.suite);
  j["main"] = estimate_payload(suite.main);
  nlohmann::json singles = nlohmann::json::array();
  for (const auto& single : suite.singles) {
    nlohmann::json s = estimate_payload(single.result);
    s["label"] = single.label;
    singles.push_back(std::move(s));
  }
  j["singles"] = std::move(singles);
  if (suite.joint_interactions)
    j["joint_interactions"] = wald_json(*suite.joint_interactions, suite.joint_terms);
  if (suite.engagement_equality)
    j["arm_equality"] = wald_json(*suite.engagement_equality, {});
  nlohmann::json extra;
  for (const auto& [name, block] : suite.extra_apes) extra[name] = ape_json(block);
  if (!suite.extra_apes.empty()) j["arm_apes"] = std::move(extra);
  return j;
}

nlohmann::json truth_json(const DgpTruth& truth, const DgpConfig& config, const RunMeta& meta) {
  nlohmann::json j = meta_json(meta);
  nlohmann::json cfg;
  cfg["n_employees"] = config.n_employees;
  cfg["n_campaigns"] = config.n_campaigns;
  cfg["seed"] = config.seed;
  cfg["link"] = link_name(config.link);
  cfg["skip_prob"] = config.skip_prob;
  cfg["click_intercept"] = config.click_intercept;
  cfg["heterogeneity_sd"] = config.heterogeneity_sd;
  cfg["state_dependence"] = config.state_dependence;
  cfg["feedback_loading"] = config.feedback_loading;
  cfg["similarity_interaction"] = config.similarity_interaction;
  cfg["report_to_click"] = config.report_to_click;
  cfg["campaign_sd"] = config.campaign_sd;
  cfg["report_intercept"] = config.report_intercept;
  cfg["report_click_loading"] = config.report_click_loading;
  cfg["report_state_dependence"] = config.report_state_dependence;
  cfg["report_lag_click"] = config.report_lag_click;
  cfg["report_heterogeneity_loading"] = config.report_heterogeneity_loading;
  cfg["burn_in"] = config.burn_in;
  j["config"] = std::move(cfg);
  auto o = [](const OracleApe& ape) {
    nlohmann::json e;
    e["estimate"] = ape.estimate;
    e["se"] = ape.se;
    return e;
  };
  j["click"] = o(truth.click);
  j["report"] = o(truth.report);
  j["safe"] = o(truth.safe);
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& [sim, ape] : truth.click_by_similarity) {
    nlohmann::json e = o(ape);
    e["cue_sim"] = sim;
    grid.push_back(std::move(e));
  }
  j["click_by_similarity"] = std::move(grid);
  j["replications"] = truth.replications;
  j["histories"] = truth.histories;
  return j;
}

PanelSummary summarize_panel(const PanelDataset& panel,
                             const std::vector<Transition>& transitions) {
  PanelSummary s;
  s.employees = static_cast<long long>(panel.employees.size());
  s.exposures = static_cast<long long>(panel.exposures.size());
  s.transitions = static_cast<long long>(transitions.size());
  long long clicks = 0, reports = 0;
  for (const Exposure& e : panel.exposures) {
    clicks += e.clicked;
    reports += e.reported;
    if (!e.clicked) {
      ++s.engagement_not_clicked;
    } else if (!e.has_seconds) {
      ++s.engagement_unknown;
    } else {
      switch (classify_engagement(true, true, e.education_seconds)) {
        case Engagement::Disengaged: ++s.engagement_disengaged; break;
        case Engagement::Engaged: ++s.engagement_engaged; break;
        case Engagement::Buffer: ++s.engagement_buffer; break;
        default: break;
      }
    }
  }
  s.click_rate = static_cast<double>(clicks) / static_cast<double>(panel.exposures.size());
  s.report_rate = static_cast<double>(reports) / static_cast<double>(panel.exposures.size());
  s.rates = transition_rates(transitions);
  return s;
}

std::vector<BalanceRow> balance_table(const PanelDataset& panel, const WeightSet& weights) {
  struct Acc {
    double sum1 = 0.0, sum0 = 0.0, w1 = 0.0, w0 = 0.0;
    void add(double value, double w, bool treated) {
      if (treated) {
        sum1 += w * value;
        w1 += w;
      } else {
        sum0 += w * value;
        w0 += w;
      }
    }
    double diff() const {
      if (w1 <= 0.0 || w0 <= 0.0) return 0.0;
      return sum1 / w1 - sum0 / w0;
    }
  };
  const std::vector<std::string> covs = {"lag_click",   "lag_report", "cum_clicks",
                                         "cum_reports", "gap_days",   "first_exposure"};
  std::vector<Acc> raw(covs.size()), weighted(covs.size());
  for (std::size_t i = 0; i < panel.exposures.size(); ++i) {
    const Exposure& e = panel.exposures[i];
    const double values[] = {double(e.lag_click),   double(e.lag_report), double(e.cum_clicks),
                             double(e.cum_reports), double(e.gap_days),   double(e.first_exposure)};
    bool treated = e.clicked != 0;
    for (std::size_t c = 0; c < covs.size(); ++c) {
      raw[c].add(values[c], 1.0, treated);
      weighted[c].add(values[c], weights.sw_trimmed[i], treated);
    }
  }
  std::vector<BalanceRow> rows;
  for (std::size_t c = 0; c < covs.size(); ++c)
    rows.push_back({covs[c], raw[c].diff(), weighted[c].diff()});
  return rows;
}

namespace {

std::string rate_or_blank(const std::optional<double>& value) {
  return value ? fmt6(*value) : "";
}

}  // namespace

void write_diagnose_csv(std::ostream& out, const PanelSummary& summary,
                        const WeightDiagnostics& diagnostics,
                        const std::vector<BalanceRow>& balance, const RunMeta& meta) {
  write_meta(out, meta);
  write_csv_row(out, {"section", "name", "value_1", "value_2", "value_3"});
  write_csv_row(out, {"panel", "employees", std::to_string(summary.employees), "", ""});
  write_csv_row(out, {"panel", "exposures", std::to_string(summary.exposures), "", ""});
  write_csv_row(out, {"panel", "transitions", std::to_string(summary.transitions), "", ""});
  write_csv_row(out, {"panel", "click_rate", fmt6(summary.click_rate), "", ""});
  write_csv_row(out, {"panel", "report_rate", fmt6(summary.report_rate), "", ""});
  write_csv_row(out, {"rates", "click_next_given_click",
                      rate_or_blank(summary.rates.click_next_given_click[1]),
                      rate_or_blank(summary.rates.click_next_given_click[0]), ""});
  write_csv_row(out, {"rates", "report_next_given_report",
                      rate_or_blank(summary.rates.report_next_given_report[1]),
                      rate_or_blank(summary.rates.report_next_given_report[0]), ""});
  write_csv_row(out, {"engagement", "not_clicked",
                      std::to_string(summary.engagement_not_clicked), "", ""});
  write_csv_row(out, {"engagement", "disengaged",
                      std::to_string(summary.engagement_disengaged), "", ""});
  write_csv_row(out, {"engagement", "engaged", std::to_string(summary.engagement_engaged), "",
                      ""});
  write_csv_row(out, {"engagement", "buffer", std::to_string(summary.engagement_buffer), "", ""});
  write_csv_row(out, {"engagement", "clicked_without_seconds",
                      std::to_string(summary.engagement_unknown), "", ""});
  write_csv_row(out, {"counts", "capped_low", std::to_string(diagnostics.capped_low), "", ""});
  write_csv_row(out, {"counts", "capped_high", std::to_string(diagnostics.capped_high), "", ""});
  summary_rows(out, "weights_raw", diagnostics.raw);
  summary_rows(out, "weights_trimmed", diagnostics.trimmed);
  for (const auto& b : balance)
    write_csv_row(out, {"balance", b.covariate, fmt6(b.diff_unweighted), fmt6(b.diff_weighted),
                        ""});
  histogram_rows(out, "hist_raw", diagnostics.raw_histogram);
  histogram_rows(out, "hist_trimmed", diagnostics.trimmed_histogram);
}

nlohmann::json diagnose_json(const PanelSummary& summary, const WeightDiagnostics& diagnostics,
                             const std::vector<BalanceRow>& balance, const RunMeta& meta) {
  nlohmann::json j = meta_json(meta);
  nlohmann::json p;
  p["employees"] = summary.employees;
  p["exposures"] = summary.exposures;
  p["transitions"] = summary.transitions;
  p["click_rate"] = summary.click_rate;
  p["report_rate"] = summary.report_rate;
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json();
  };
  p["click_next_given_click_1"] = opt(summary.rates.click_next_given_click[1]);
  p["click_next_given_click_0"] = opt(summary.rates.click_next_given_click[0]);
  p["report_next_given_report_1"] = opt(summary.rates.report_next_given_report[1]);
  p["report_next_given_report_0"] = opt(summary.rates.report_next_given_report[0]);
  nlohmann::json eng;
  eng["not_clicked"] = summary.engagement_not_clicked;
  eng["disengaged"] = summary.engagement_disengaged;
  eng["engaged"] = summary.engagement_engaged;
  eng["buffer"] = summary.engagement_buffer;
  eng["clicked_without_seconds"] = summary.engagement_unknown;
  p["engagement"] = std::move(eng);
  j["panel"] = std::move(p);
  j["weights"] = weight_diagnostics_json(diagnostics, RunMeta{meta.config_hash, meta.seed});
  nlohmann::json bal = nlohmann::json::array();
  for (const auto& b : balance) {
    nlohmann::json e;
    e["covariate"] = b.covariate;
    e["diff_unweighted"] = b.diff_unweighted;
    e["diff_weighted"] = b.diff_weighted;
    bal.push_back(std::move(e));
  }
  j["balance"] = std::move(bal);
  return j;
}

}  // namespace phishpanel
