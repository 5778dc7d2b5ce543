// The estimator ladder and its extensions: specification building (correlated
// random effects terms, moderator interactions), weighted fitting through the
// GLM core, average partial effects, the side-by-side progression report, and
// the moderator suites (similarity, design features, cues, cue-by-emotion,
// engagement split).
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phishpanel/glm.hpp"
#include "phishpanel/margins.hpp"
#include "phishpanel/panel.hpp"
#include "phishpanel/scenario.hpp"
#include "phishpanel/weights.hpp"

namespace phishpanel {

enum class Outcome { Click, Report, Safe };
enum class EstimatorKind { FeLpm, PooledProbit, CreProbit, MsmProbit, MsmCre, MsmLogit };

std::string outcome_name(Outcome outcome);
std::string estimator_name(EstimatorKind kind);
Outcome parse_outcome(const std::string& name);
EstimatorKind parse_estimator(const std::string& name);

struct CreOptions {
  // Time-varying covariates whose per-employee means enter the CRE block:
  // the similarity measure and the coded design indicators by default.
  // "cue_sim" averages over the employee's transitions; scenario feature
  // names average the feature of each exposure's scenario; "click" (the
  // mean of the treatment itself) is available but not a default.
  std::vector<std::string> mean_covariates = {"cue_sim", "ann_email", "ann_land",
                                              "report_pitch", "emot_heur"};
};

struct CreTerms {
  std::vector<std::string> names;  // block column names, in order
  Eigen::MatrixXd values;          // one row per employee
  bool includes_initial_report = false;
};

// Per-employee block: initial click (and initial report when requested),
// Mundlak means of the configured covariates, and the exposure count.
CreTerms build_cre_terms(const PanelDataset& panel, const std::vector<Transition>& transitions,
                         const std::vector<ScenarioCode>& codes, bool include_initial_report,
                         const CreOptions& options = {});

struct ModelSpec {
  Outcome outcome = Outcome::Click;
  EstimatorKind kind = EstimatorKind::MsmCre;
  // Grid for similarity-moderated APEs; empty means {0, 0.25, mean, 0.75, 1}.
  std::vector<double> similarity_grid;
  bool ape_use_weights = true;  // weighted-sample APE averaging for msm kinds
  CreOptions cre;
  FitOptions fit;

  bool weighted() const {
    return kind == EstimatorKind::MsmProbit || kind == EstimatorKind::MsmCre ||
           kind == EstimatorKind::MsmLogit;
  }
  bool has_cre() const {
    return kind == EstimatorKind::CreProbit || kind == EstimatorKind::MsmCre ||
           kind == EstimatorKind::MsmLogit;
  }
  Link link() const { return kind == EstimatorKind::MsmLogit ? Link::Logit : Link::Probit; }
};

struct EstimateResult {
  FitResult fit;
  ApeBlock apes;
  DesignMatrix design;  // the estimation design, for downstream margins work
  Eigen::VectorXd y;
  TreatmentLayout layout;
  std::vector<std::string> warnings;
  std::vector<std::string> omitted_collinear;
  long long n_excluded = 0;  // rows dropped by the engagement buffer rule
};

// Fits one specification on the transition sample. msm kinds require a
// weight set (untrimmed weights raise a warning); cre kinds require CRE
// terms built for the matching outcome. Transitions must carry their
// scenario codes (build_transitions joined them).
EstimateResult estimate(const ModelSpec& spec, const PanelDataset& panel,
                        const std::vector<Transition>& transitions, const WeightSet* weights,
                        const CreTerms* cre);

struct ProgressionColumn {
  EstimatorKind kind = EstimatorKind::FeLpm;
  std::string name;
  bool addresses_heterogeneity = false;
  bool addresses_feedback = false;
  std::optional<EstimateResult> result;
  std::string error;  // set when this estimator failed
};

struct ProgressionReport {
  std::vector<ProgressionColumn> columns;
};

// Runs fe-lpm, pooled-probit, cre-probit, msm-probit, msm-cre side by side
// on the click outcome. A single estimator failure is annotated in its
// column; the others still report.
ProgressionReport progression(const PanelDataset& panel,
                              const std::vector<Transition>& transitions,
                              const WeightSet& weights, const CreTerms& cre,
                              const ModelSpec& base = {});

enum class Suite { Similarity, Design, Cues, CueByEducation, Engagement };

std::string suite_name(Suite suite);
Suite parse_suite(const std::string& name);

struct SuiteModel {
  std::string label;
  EstimateResult result;
};

struct SuiteResult {
  Suite suite = Suite::Similarity;
  EstimateResult main;             // the joint / primary model of the suite
  std::vector<SuiteModel> singles; // one-at-a-time cue models
  std::optional<WaldResult> joint_interactions;
  std::optional<WaldResult> engagement_equality;
  std::vector<std::string> joint_terms;  // coefficient names under the joint test
  // Named APE blocks beyond main.apes (the engagement suite reports one per arm).
  std::vector<std::pair<std::string, ApeBlock>> extra_apes;
};

// Moderator suites built on top of estimate(): similarity (treatment, cue
// similarity, and their interaction, with grid APEs), design (treatment by
// each education design feature), cues (per-cue and joint models with a
// joint Wald test), cue-by-education (three-way interactions with automatic
// collinearity pruning), engagement (treatment split by landing-page dwell
// time with buffer rows excluded and an equality test).
SuiteResult interaction_suite(Suite suite, const ModelSpec& spec, const PanelDataset& panel,
                              const std::vector<Transition>& transitions, const WeightSet* weights,
                              const CreTerms* cre);

}  // namespace phishpanel
