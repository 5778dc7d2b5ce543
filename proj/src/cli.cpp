#include "phishpanel/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "phishpanel/dgp.hpp"
#include "phishpanel/errors.hpp"
#include "phishpanel/estimators.hpp"
#include "phishpanel/report.hpp"

namespace phishpanel {

namespace {

using Entries = std::vector<std::pair<std::string, std::string>>;

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  return out;
}

std::vector<ScenarioCode> catalog_codes() {
  std::vector<ScenarioCode> codes;
  std::set<int> seen;
  for (const auto& entry : default_catalog())
    if (seen.insert(entry.code.scenario_id).second) codes.push_back(entry.code);
  return codes;
}

// Flags shared by every subcommand that reads a panel.
struct DataFlags {
  std::string panel_path;
  std::string codes_path;
  bool consecutive_only = false;
};

void add_data_flags(CLI::App* cmd, DataFlags& flags) {
  cmd->add_option("--panel", flags.panel_path, "exposure panel CSV")->required();
  cmd->add_option("--codes", flags.codes_path,
                  "scenario code CSV (default: the bundled catalog)");
  cmd->add_flag("--consecutive-only", flags.consecutive_only,
                "keep only transitions between adjacent campaign numbers");
}

struct TrimFlags {
  double lower = 1.0;
  double upper = 99.0;
  bool no_trim = false;
  std::string rule = "linear";
};

void add_trim_flags(CLI::App* cmd, TrimFlags& flags) {
  cmd->add_option("--trim-lower", flags.lower, "lower trim percentile (default 1)");
  cmd->add_option("--trim-upper", flags.upper, "upper trim percentile (default 99)");
  cmd->add_flag("--no-trim", flags.no_trim, "disable weight trimming");
  cmd->add_option("--percentile-rule", flags.rule,
                  "percentile definition: linear or nearest (default linear)")
      ->check(CLI::IsMember({"linear", "nearest"}));
}

PercentileRule parse_rule(const std::string& rule) {
  return rule == "nearest" ? PercentileRule::NearestRank
                           : PercentileRule::LinearInterpolation;
}

void hash_data_flags(Entries& entries, const DataFlags& flags) {
  entries.emplace_back("panel", flags.panel_path);
  entries.emplace_back("input:panel", file_digest(flags.panel_path));
  if (!flags.codes_path.empty()) {
    entries.emplace_back("codes", flags.codes_path);
    entries.emplace_back("input:codes", file_digest(flags.codes_path));
  } else {
    entries.emplace_back("codes", "builtin");
  }
  entries.emplace_back("consecutive_only", flags.consecutive_only ? "1" : "0");
}

void hash_trim_flags(Entries& entries, const TrimFlags& flags) {
  entries.emplace_back("trim_lower", format_fixed(flags.lower, 6));
  entries.emplace_back("trim_upper", format_fixed(flags.upper, 6));
  entries.emplace_back("no_trim", flags.no_trim ? "1" : "0");
  entries.emplace_back("percentile_rule", flags.rule);
}

struct LoadedData {
  PanelDataset panel;
  std::vector<ScenarioCode> codes;
  std::vector<Transition> transitions;
};

LoadedData load_data(const DataFlags& flags) {
  LoadedData data;
  data.panel = read_panel_csv(flags.panel_path);
  data.codes = flags.codes_path.empty() ? catalog_codes() : read_scenario_codes(flags.codes_path);
  data.transitions = build_transitions(data.panel, data.codes, flags.consecutive_only);
  return data;
}

WeightSet build_weights(const PanelDataset& panel, const TrimFlags& flags) {
  WeightOptions options;
  options.percentile_rule = parse_rule(flags.rule);
  WeightSet ws = stabilized_weights(panel, options);
  if (!flags.no_trim) ws = trim_weights(ws, flags.lower, flags.upper);
  return ws;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      double v = std::stod(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      grid.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError("cannot parse grid value '" + item + "'");
    }
  }
  if (grid.empty()) throw ValidationError("empty moderator grid");
  return grid;
}

void check_thread_env() {
  const char* env = std::getenv("PHISHPANEL_THREADS");
  if (!env) return;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1)
    throw ValidationError("PHISHPANEL_THREADS must be a positive integer, got '" +
                          std::string(env) + "'");
}

// ---- subcommand configs ----

struct IngestCmd {
  DataFlags data;
  std::string out_path, transitions_path, summary_path;
};

struct SimilarityCmd {
  std::string codes_path;
  std::string metric = "jaccard";
  std::string layer = "cues";
  std::string out_path, pairs_path;
  std::string format = "csv";
  int top_pairs = 10;
};

struct WeightsCmd {
  std::string panel_path;
  TrimFlags trim;
  std::string out_path, diagnostics_path;
  std::string format = "csv";
};

struct EstimateCmd {
  DataFlags data;
  TrimFlags trim;
  std::string estimator = "msm-cre";
  std::string outcome = "click";
  std::string cre_covariates;
  bool ape_unweighted = false;
  bool cluster_correction = false;
  std::string out_path;
  std::string format = "csv";
};

struct ProgressionCmd {
  DataFlags data;
  TrimFlags trim;
  std::string cre_covariates;
  bool cluster_correction = false;
  std::string out_path;
  std::string format = "csv";
};

struct SuiteCmd {
  DataFlags data;
  TrimFlags trim;
  std::string suite;
  std::string estimator = "msm-cre";
  std::string outcome = "click";
  std::string cre_covariates;
  std::string sim_grid;
  bool ape_unweighted = false;
  bool cluster_correction = false;
  std::string out_path;
  std::string format = "csv";
};

struct SimulateCmd {
  std::string preset = "paper-like";
  bool full_size = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int employees = 0, campaigns = 0;
  bool employees_set = false, campaigns_set = false;
  double skip_prob = 0.0;
  bool skip_set = false;
  std::string link;
  std::string out_path, truth_path;
  int truth_reps = 0;
  std::string sim_grid;
};

struct DiagnoseCmd {
  DataFlags data;
  TrimFlags trim;
  std::string out_path;
  std::string format = "csv";
};

ModelSpec make_spec(const std::string& estimator, const std::string& outcome,
                    const std::string& cre_covariates, bool ape_unweighted,
                    bool cluster_correction, const std::string& sim_grid) {
  ModelSpec spec;
  spec.kind = parse_estimator(estimator);
  spec.outcome = parse_outcome(outcome);
  spec.ape_use_weights = !ape_unweighted;
  spec.fit.cluster_correction = cluster_correction;
  if (!cre_covariates.empty()) {
    spec.cre.mean_covariates.clear();
    std::stringstream ss(cre_covariates);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) spec.cre.mean_covariates.push_back(item);
  }
  if (!sim_grid.empty()) spec.similarity_grid = parse_grid(sim_grid);
  return spec;
}

void hash_spec(Entries& entries, const ModelSpec& spec) {
  entries.emplace_back("estimator", estimator_name(spec.kind));
  entries.emplace_back("outcome", outcome_name(spec.outcome));
  entries.emplace_back("ape_weighted", spec.ape_use_weights ? "1" : "0");
  entries.emplace_back("cluster_correction", spec.fit.cluster_correction ? "1" : "0");
  std::string covs;
  for (const auto& c : spec.cre.mean_covariates) covs += (covs.empty() ? "" : ",") + c;
  entries.emplace_back("cre_covariates", covs);
  std::string grid;
  for (double v : spec.similarity_grid)
    grid += (grid.empty() ? "" : ",") + format_fixed(v, 6);
  entries.emplace_back("similarity_grid", grid);
}

// Weights and CRE terms are only built when the specification needs them.
struct FitInputs {
  std::optional<WeightSet> weights;
  std::optional<CreTerms> cre;
};

FitInputs build_fit_inputs(const ModelSpec& spec, const LoadedData& data,
                           const TrimFlags& trim) {
  FitInputs inputs;
  if (spec.weighted()) inputs.weights = build_weights(data.panel, trim);
  if (spec.has_cre())
    inputs.cre = build_cre_terms(data.panel, data.transitions, data.codes,
                                 spec.outcome != Outcome::Click, spec.cre);
  return inputs;
}

int run_ingest(const IngestCmd& cmd, std::ostream& out) {
  LoadedData data = load_data(cmd.data);
  Entries entries;
  entries.emplace_back("subcommand", "ingest");
  hash_data_flags(entries, cmd.data);
  RunMeta meta{config_hash(entries), std::nullopt};

  if (!cmd.out_path.empty()) {
    auto f = open_output(cmd.out_path);
    write_meta(f, meta);
    write_panel_csv(f, data.panel);
  }
  if (!cmd.transitions_path.empty()) {
    auto f = open_output(cmd.transitions_path);
    write_meta(f, meta);
    write_transitions_csv(f, data.panel, data.transitions);
  }
  if (!cmd.summary_path.empty()) {
    PanelSummary summary = summarize_panel(data.panel, data.transitions);
    nlohmann::json j = meta_json(meta);
    j["employees"] = summary.employees;
    j["exposures"] = summary.exposures;
    j["transitions"] = summary.transitions;
    j["click_rate"] = summary.click_rate;
    j["report_rate"] = summary.report_rate;
    auto f = open_output(cmd.summary_path);
    f << j.dump(2) << "\n";
  }
  out << "employees=" << data.panel.n_employees() << " exposures=" << data.panel.n_exposures()
      << " transitions=" << data.transitions.size() << "\n";
  return 0;
}

int run_similarity(const SimilarityCmd& cmd, std::ostream& out) {
  std::vector<ScenarioCode> codes =
      cmd.codes_path.empty() ? catalog_codes() : read_scenario_codes(cmd.codes_path);
  SimilarityMetric metric =
      cmd.metric == "smc" ? SimilarityMetric::Smc : SimilarityMetric::Jaccard;
  FeatureLayer layer = cmd.layer == "education" ? FeatureLayer::Education : FeatureLayer::Cues;
  SimilarityMatrix matrix = similarity_matrix(codes, metric, layer);
  std::vector<ScenarioPair> pairs =
      top_pairs(matrix, codes, static_cast<std::size_t>(cmd.top_pairs));

  Entries entries;
  entries.emplace_back("subcommand", "similarity");
  entries.emplace_back("metric", cmd.metric);
  entries.emplace_back("layer", cmd.layer);
  entries.emplace_back("top_pairs", std::to_string(cmd.top_pairs));
  entries.emplace_back("format", cmd.format);
  if (!cmd.codes_path.empty()) {
    entries.emplace_back("codes", cmd.codes_path);
    entries.emplace_back("input:codes", file_digest(cmd.codes_path));
  } else {
    entries.emplace_back("codes", "builtin");
  }
  RunMeta meta{config_hash(entries), std::nullopt};

  if (cmd.format == "json") {
    nlohmann::json j = similarity_json(matrix, pairs, meta);
    if (cmd.out_path.empty()) {
      out << j.dump(2) << "\n";
    } else {
      auto f = open_output(cmd.out_path);
      f << j.dump(2) << "\n";
    }
  } else {
    if (cmd.out_path.empty()) {
      write_similarity_csv(out, matrix, meta);
    } else {
      auto f = open_output(cmd.out_path);
      write_similarity_csv(f, matrix, meta);
    }
    if (!cmd.pairs_path.empty()) {
      auto f = open_output(cmd.pairs_path);
      write_top_pairs_csv(f, pairs, meta);
    }
  }
  return 0;
}

int run_weights(const WeightsCmd& cmd, std::ostream& out) {
  PanelDataset panel = read_panel_csv(cmd.panel_path);
  WeightSet ws = build_weights(panel, cmd.trim);
  WeightDiagnostics diag = weight_diagnostics(ws);

  Entries entries;
  entries.emplace_back("subcommand", "weights");
  entries.emplace_back("panel", cmd.panel_path);
  entries.emplace_back("input:panel", file_digest(cmd.panel_path));
  hash_trim_flags(entries, cmd.trim);
  entries.emplace_back("format", cmd.format);
  RunMeta meta{config_hash(entries), std::nullopt};

  if (!cmd.out_path.empty()) {
    auto f = open_output(cmd.out_path);
    write_weights_csv(f, panel, ws, meta);
  }
  if (!cmd.diagnostics_path.empty()) {
    auto f = open_output(cmd.diagnostics_path);
    if (cmd.format == "json")
      f << weight_diagnostics_json(diag, meta).dump(2) << "\n";
    else
      write_weight_diagnostics_csv(f, diag, meta);
  }
  out << "n=" << diag.n << " mean=" << format_fixed(diag.trimmed.mean, 6)
      << " sd=" << format_fixed(diag.trimmed.sd, 6) << " capped="
      << (diag.capped_low + diag.capped_high) << "\n";
  return 0;
}

int run_estimate(const EstimateCmd& cmd, std::ostream& out) {
  check_thread_env();
  ModelSpec spec = make_spec(cmd.estimator, cmd.outcome, cmd.cre_covariates, cmd.ape_unweighted,
                             cmd.cluster_correction, "");
  LoadedData data = load_data(cmd.data);
  FitInputs inputs = build_fit_inputs(spec, data, cmd.trim);

  Entries entries;
  entries.emplace_back("subcommand", "estimate");
  hash_data_flags(entries, cmd.data);
  hash_trim_flags(entries, cmd.trim);
  hash_spec(entries, spec);
  entries.emplace_back("format", cmd.format);
  RunMeta meta{config_hash(entries), std::nullopt};

  EstimateResult result =
      estimate(spec, data.panel, data.transitions,
               inputs.weights ? &*inputs.weights : nullptr, inputs.cre ? &*inputs.cre : nullptr);

  if (!cmd.out_path.empty()) {
    auto f = open_output(cmd.out_path);
    if (cmd.format == "json")
      f << estimate_json(result, meta).dump(2) << "\n";
    else
      write_estimate_csv(f, result, meta);
  } else {
    if (cmd.format == "json")
      out << estimate_json(result, meta).dump(2) << "\n";
    else
      write_estimate_csv(out, result, meta);
  }
  return 0;
}

int run_progression(const ProgressionCmd& cmd, std::ostream& out) {
  check_thread_env();
  ModelSpec base = make_spec("msm-cre", "click", cmd.cre_covariates, false,
                             cmd.cluster_correction, "");
  LoadedData data = load_data(cmd.data);
  WeightSet weights = build_weights(data.panel, cmd.trim);
  CreTerms cre = build_cre_terms(data.panel, data.transitions, data.codes, false, base.cre);

  Entries entries;
  entries.emplace_back("subcommand", "progression");
  hash_data_flags(entries, cmd.data);
  hash_trim_flags(entries, cmd.trim);
  hash_spec(entries, base);
  entries.emplace_back("format", cmd.format);
  RunMeta meta{config_hash(entries), std::nullopt};

  ProgressionReport report = progression(data.panel, data.transitions, weights, cre, base);

  if (!cmd.out_path.empty()) {
    auto f = open_output(cmd.out_path);
    if (cmd.format == "json")
      f << progression_json(report, meta).dump(2) << "\n";
    else
      write_progression_csv(f, report, meta);
  } else {
    if (cmd.format == "json")
      out << progression_json(report, meta).dump(2) << "\n";
    else
      write_progression_csv(out, report, meta);
  }
  return 0;
}

int run_suite(const SuiteCmd& cmd, std::ostream& out) {
  check_thread_env();
  Suite suite = parse_suite(cmd.suite);
  ModelSpec spec = make_spec(cmd.estimator, cmd.outcome, cmd.cre_covariates, cmd.ape_unweighted,
                             cmd.cluster_correction, cmd.sim_grid);
  LoadedData data = load_data(cmd.data);
  FitInputs inputs = build_fit_inputs(spec, data, cmd.trim);

  Entries entries;
  entries.emplace_back("subcommand", "suite");
  entries.emplace_back("suite", cmd.suite);
  hash_data_flags(entries, cmd.data);
  hash_trim_flags(entries, cmd.trim);
  hash_spec(entries, spec);
  entries.emplace_back("format", cmd.format);
  RunMeta meta{config_hash(entries), std::nullopt};

  SuiteResult result =
      interaction_suite(suite, spec, data.panel, data.transitions,
                        inputs.weights ? &*inputs.weights : nullptr,
                        inputs.cre ? &*inputs.cre : nullptr);

  if (!cmd.out_path.empty()) {
    auto f = open_output(cmd.out_path);
    if (cmd.format == "json")
      f << suite_json(result, meta).dump(2) << "\n";
    else
      write_suite_csv(f, result, meta);
  } else {
    if (cmd.format == "json")
      out << suite_json(result, meta).dump(2) << "\n";
    else
      write_suite_csv(out, result, meta);
  }
  return 0;
}

int run_simulate(const SimulateCmd& cmd, std::ostream& out) {
  check_thread_env();
  std::string preset = cmd.preset;
  if (cmd.full_size && preset == "paper-like") preset = "paper-like-full";
  DgpConfig config = dgp_preset(preset);
  if (cmd.seed_set) config.seed = cmd.seed;
  if (cmd.employees_set) config.n_employees = cmd.employees;
  if (cmd.campaigns_set) config.n_campaigns = cmd.campaigns;
  if (cmd.skip_set) config.skip_prob = cmd.skip_prob;
  if (!cmd.link.empty()) config.link = cmd.link == "logit" ? Link::Logit : Link::Probit;
  config.validate();

  Entries entries;
  entries.emplace_back("subcommand", "simulate");
  entries.emplace_back("preset", preset);
  entries.emplace_back("seed", std::to_string(config.seed));
  entries.emplace_back("employees", std::to_string(config.n_employees));
  entries.emplace_back("campaigns", std::to_string(config.n_campaigns));
  entries.emplace_back("skip_prob", format_fixed(config.skip_prob, 6));
  entries.emplace_back("link", link_name(config.link));
  RunMeta meta{config_hash(entries), config.seed};

  PanelDataset panel = simulate_panel(config);
  {
    auto f = open_output(cmd.out_path);
    write_meta(f, meta);
    write_panel_csv(f, panel);
  }
  if (!cmd.truth_path.empty()) {
    int reps = cmd.truth_reps;
    if (reps <= 0)
      reps = static_cast<int>((10000 + config.n_employees - 1) / config.n_employees);
    std::vector<double> grid =
        cmd.sim_grid.empty() ? std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}
                             : parse_grid(cmd.sim_grid);
    DgpTruth truth = oracle_ape(config, reps, grid);
    auto f = open_output(cmd.truth_path);
    f << truth_json(truth, config, meta).dump(2) << "\n";
  }
  out << "employees=" << panel.n_employees() << " exposures=" << panel.n_exposures()
      << " transitions=" << panel.n_transitions() << "\n";
  return 0;
}

int run_diagnose(const DiagnoseCmd& cmd, std::ostream& out) {
  LoadedData data = load_data(cmd.data);
  WeightSet ws = build_weights(data.panel, cmd.trim);
  WeightDiagnostics diag = weight_diagnostics(ws);
  PanelSummary summary = summarize_panel(data.panel, data.transitions);
  std::vector<BalanceRow> balance = balance_table(data.panel, ws);

  Entries entries;
  entries.emplace_back("subcommand", "diagnose");
  hash_data_flags(entries, cmd.data);
  hash_trim_flags(entries, cmd.trim);
  entries.emplace_back("format", cmd.format);
  RunMeta meta{config_hash(entries), std::nullopt};

  if (!cmd.out_path.empty()) {
    auto f = open_output(cmd.out_path);
    if (cmd.format == "json")
      f << diagnose_json(summary, diag, balance, meta).dump(2) << "\n";
    else
      write_diagnose_csv(f, summary, diag, balance, meta);
  } else {
    if (cmd.format == "json")
      out << diagnose_json(summary, diag, balance, meta).dump(2) << "\n";
    else
      write_diagnose_csv(out, summary, diag, balance, meta);
  }
  return 0;
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal estimation for repeated-exposure click panels"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  IngestCmd ingest;
  auto* c_ingest = app.add_subcommand("ingest", "validate a panel and emit canonical files");
  add_data_flags(c_ingest, ingest.data);
  c_ingest->add_option("--out", ingest.out_path, "canonical panel CSV");
  c_ingest->add_option("--transitions", ingest.transitions_path, "transition CSV");
  c_ingest->add_option("--summary", ingest.summary_path, "summary JSON");

  SimilarityCmd similarity;
  auto* c_sim = app.add_subcommand("similarity", "pairwise scenario similarity matrices");
  c_sim->add_option("--codes", similarity.codes_path,
                    "scenario code CSV (default: the bundled catalog)");
  c_sim->add_option("--metric", similarity.metric, "jaccard or smc")
      ->check(CLI::IsMember({"jaccard", "smc"}));
  c_sim->add_option("--layer", similarity.layer, "cues or education")
      ->check(CLI::IsMember({"cues", "education"}));
  c_sim->add_option("--out", similarity.out_path, "matrix output file (default stdout)");
  c_sim->add_option("--pairs-out", similarity.pairs_path, "top-pairs CSV output");
  c_sim->add_option("--top-pairs", similarity.top_pairs, "number of ranked pairs (default 10)");
  c_sim->add_option("--format", similarity.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  WeightsCmd weights;
  auto* c_weights = app.add_subcommand("weights", "stabilized treatment weights");
  c_weights->add_option("--panel", weights.panel_path, "exposure panel CSV")->required();
  add_trim_flags(c_weights, weights.trim);
  c_weights->add_option("--out", weights.out_path, "per-exposure weight CSV");
  c_weights->add_option("--diagnostics", weights.diagnostics_path, "diagnostics output");
  c_weights->add_option("--format", weights.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  EstimateCmd est;
  auto* c_est = app.add_subcommand("estimate", "fit one estimator");
  add_data_flags(c_est, est.data);
  add_trim_flags(c_est, est.trim);
  c_est->add_option("--estimator", est.estimator,
                    "fe-lpm, pooled-probit, cre-probit, msm-probit, msm-cre, msm-logit");
  c_est->add_option("--outcome", est.outcome, "click, report, or safe");
  c_est->add_option("--cre-covariates", est.cre_covariates,
                    "comma-separated Mundlak mean covariates");
  c_est->add_flag("--ape-unweighted", est.ape_unweighted,
                  "average APEs over the unweighted sample");
  c_est->add_flag("--cluster-correction", est.cluster_correction,
                  "apply the G/(G-1) cluster correction");
  c_est->add_option("--out", est.out_path, "output file (default stdout)");
  c_est->add_option("--format", est.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  ProgressionCmd prog;
  auto* c_prog = app.add_subcommand("progression", "run the estimator ladder side by side");
  add_data_flags(c_prog, prog.data);
  add_trim_flags(c_prog, prog.trim);
  c_prog->add_option("--cre-covariates", prog.cre_covariates,
                     "comma-separated Mundlak mean covariates");
  c_prog->add_flag("--cluster-correction", prog.cluster_correction,
                   "apply the G/(G-1) cluster correction");
  c_prog->add_option("--out", prog.out_path, "output file (default stdout)");
  c_prog->add_option("--format", prog.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  SuiteCmd suite;
  auto* c_suite = app.add_subcommand("suite", "moderator interaction suites");
  c_suite->add_option("--suite", suite.suite,
                      "similarity, design, cues, cue-by-education, or engagement")
      ->required();
  add_data_flags(c_suite, suite.data);
  add_trim_flags(c_suite, suite.trim);
  c_suite->add_option("--estimator", suite.estimator, "estimator kind (default msm-cre)");
  c_suite->add_option("--outcome", suite.outcome, "click, report, or safe");
  c_suite->add_option("--cre-covariates", suite.cre_covariates,
                      "comma-separated Mundlak mean covariates");
  c_suite->add_option("--sim-grid", suite.sim_grid,
                      "comma-separated moderator grid for similarity APEs");
  c_suite->add_flag("--ape-unweighted", suite.ape_unweighted,
                    "average APEs over the unweighted sample");
  c_suite->add_flag("--cluster-correction", suite.cluster_correction,
                    "apply the G/(G-1) cluster correction");
  c_suite->add_option("--out", suite.out_path, "output file (default stdout)");
  c_suite->add_option("--format", suite.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  SimulateCmd sim;
  auto* c_simulate = app.add_subcommand("simulate", "generate a synthetic panel");
  c_simulate->add_option("--preset", sim.preset,
                         "paper-like, paper-like-full, heterogeneity-only, "
                         "exchangeable, short-panel");
  c_simulate->add_flag("--full-size", sim.full_size,
                       "use the full panel size for the paper-like preset");
  auto* seed_opt = c_simulate->add_option("--seed", sim.seed, "RNG seed");
  auto* emp_opt = c_simulate->add_option("--employees", sim.employees, "employee count");
  auto* camp_opt = c_simulate->add_option("--campaigns", sim.campaigns, "campaign count");
  auto* skip_opt = c_simulate->add_option("--skip-prob", sim.skip_prob,
                                          "per-campaign skip probability");
  c_simulate->add_option("--link", sim.link, "probit or logit")
      ->check(CLI::IsMember({"probit", "logit"}));
  c_simulate->add_option("--out", sim.out_path, "panel CSV output")->required();
  c_simulate->add_option("--truth", sim.truth_path, "oracle truth JSON output");
  c_simulate->add_option("--truth-reps", sim.truth_reps,
                         "oracle replications (default: enough for 10,000 paths)");
  c_simulate->add_option("--sim-grid", sim.sim_grid,
                         "similarity grid for the conditional oracle");

  DiagnoseCmd diag;
  auto* c_diag = app.add_subcommand("diagnose", "panel, weight, and balance diagnostics");
  add_data_flags(c_diag, diag.data);
  add_trim_flags(c_diag, diag.trim);
  c_diag->add_option("--out", diag.out_path, "output file (default stdout)");
  c_diag->add_option("--format", diag.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  std::vector<const char*> argv;
  argv.push_back("phishpanel");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  sim.seed_set = seed_opt->count() > 0;
  sim.employees_set = emp_opt->count() > 0;
  sim.campaigns_set = camp_opt->count() > 0;
  sim.skip_set = skip_opt->count() > 0;

  try {
    if (c_ingest->parsed()) return run_ingest(ingest, out);
    if (c_sim->parsed()) return run_similarity(similarity, out);
    if (c_weights->parsed()) return run_weights(weights, out);
    if (c_est->parsed()) return run_estimate(est, out);
    if (c_prog->parsed()) return run_progression(prog, out);
    if (c_suite->parsed()) return run_suite(suite, out);
    if (c_simulate->parsed()) return run_simulate(sim, out);
    if (c_diag->parsed()) return run_diagnose(diag, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "error: no subcommand executed\n";
  return 1;
}

}  // namespace phishpanel
