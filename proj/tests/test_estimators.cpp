#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "phishpanel/csv.hpp"
#include "phishpanel/dgp.hpp"
#include "phishpanel/errors.hpp"
#include "phishpanel/estimators.hpp"
#include "phishpanel/panel.hpp"
#include "phishpanel/weights.hpp"

using namespace phishpanel;

namespace {

struct Prepared {
  PanelDataset panel;
  std::vector<ScenarioCode> codes;
  std::vector<Transition> transitions;
  WeightSet weights;
  CreTerms cre;
};

Prepared prepare(const DgpConfig& config, bool initial_report = false) {
  Prepared p;
  p.panel = simulate_panel(config);
  p.codes = dgp_scenario_codes(config);
  p.transitions = build_transitions(p.panel, p.codes);
  p.weights = trim_weights(stabilized_weights(p.panel), 1.0, 99.0);
  p.cre = build_cre_terms(p.panel, p.transitions, p.codes, initial_report);
  return p;
}

const Prepared& calibrated_panel() {
  static const Prepared p = [] {
    DgpConfig config = dgp_preset("paper-like");
    config.n_employees = 700;
    return prepare(config);
  }();
  return p;
}

Eigen::Index cre_column(const CreTerms& cre, const std::string& name) {
  auto it = std::find(cre.names.begin(), cre.names.end(), name);
  REQUIRE(it != cre.names.end());
  return static_cast<Eigen::Index>(it - cre.names.begin());
}

double overall_ape(const EstimateResult& r) { return r.apes.overall.estimate; }

}  // namespace

TEST_CASE("the employee-level block averages covariates over each employee's history") {
  const Prepared& p = calibrated_panel();
  const CreTerms& cre = p.cre;
  CHECK(cre.names.front() == "y1_click");
  CHECK(cre.names.back() == "n_exposures");
  CHECK(!cre.includes_initial_report);
  CHECK(cre.values.rows() == static_cast<Eigen::Index>(p.panel.employees.size()));

  Eigen::Index c_sim = cre_column(cre, "mean_cue_sim");
  Eigen::Index c_first = cre_column(cre, "y1_click");
  Eigen::Index c_count = cre_column(cre, "n_exposures");

  std::vector<double> sum(p.panel.employees.size(), 0.0);
  std::vector<double> lo(p.panel.employees.size(), 2.0);
  std::vector<double> hi(p.panel.employees.size(), -1.0);
  std::vector<int> cnt(p.panel.employees.size(), 0);
  for (const Transition& t : p.transitions) {
    auto e = static_cast<std::size_t>(t.employee);
    sum[e] += t.cue_sim;
    lo[e] = std::min(lo[e], t.cue_sim);
    hi[e] = std::max(hi[e], t.cue_sim);
    ++cnt[e];
  }
  for (std::size_t e = 0; e < p.panel.employees.size(); ++e) {
    auto ei = static_cast<Eigen::Index>(e);
    const Employee& emp = p.panel.employees[e];
    REQUIRE(cnt[e] > 0);
    CHECK(cre.values(ei, c_sim) ==
          doctest::Approx(sum[e] / static_cast<double>(cnt[e])).epsilon(1e-12));
    CHECK(cre.values(ei, c_sim) >= lo[e] - 1e-12);
    CHECK(cre.values(ei, c_sim) <= hi[e] + 1e-12);
    CHECK(cre.values(ei, c_first) == double(p.panel.exposures[emp.begin].clicked));
    CHECK(cre.values(ei, c_count) == double(emp.end - emp.begin));
  }
}

TEST_CASE("a half-overlapping cue rotation gives a mean similarity of one half") {
  // Two custom scenarios sharing one of two present cues: Jaccard 1/2 on
  // every adjacent pair, so the employee's mean lands on 0.5 exactly. The
  // second employee sees the same scenario throughout, pinning the mean at 1.
  std::vector<ScenarioCode> codes(2);
  codes[0].scenario_id = 901;
  codes[0].cues = {1, 1, 0, 0, 0};
  codes[1].scenario_id = 902;
  codes[1].cues = {1, 0, 0, 0, 0};

  std::ostringstream csv;
  csv << "employee_id,campaign_id,scenario_id,sent_at,clicked,reported,education_seconds,"
         "role,job_status,org_unit,tenure_days\n";
  const int scen[] = {901, 902, 901, 902};
  for (int t = 0; t < 4; ++t)
    csv << "e1," << (t + 1) << ',' << scen[t] << ",2016-0" << (t + 1) << "-05,"
        << (t == 0 ? "1,0,120" : "0,0,") << ",analyst,full-time,ops,400\n";
  for (int t = 0; t < 3; ++t)
    csv << "e2," << (t + 1) << ",901,2016-0" << (t + 1) << "-05,0,0,,clerk,part-time,sales,250\n";

  PanelDataset panel = ingest_exposures([&] {
    std::istringstream in(csv.str());
    return read_csv(in);
  }());
  std::vector<Transition> transitions = build_transitions(panel, codes);
  CreTerms cre = build_cre_terms(panel, transitions, codes, false);

  Eigen::Index c_sim = cre_column(cre, "mean_cue_sim");
  Eigen::Index c_first = cre_column(cre, "y1_click");
  Eigen::Index c_count = cre_column(cre, "n_exposures");
  CHECK(cre.values(0, c_sim) == 0.5);
  CHECK(cre.values(1, c_sim) == 1.0);
  CHECK(cre.values(0, c_first) == 1.0);
  CHECK(cre.values(1, c_first) == 0.0);
  CHECK(cre.values(0, c_count) == 4.0);
  CHECK(cre.values(1, c_count) == 3.0);
}

TEST_CASE("a mean with no variation is omitted and reported, not fatal") {
  // A catalog collapsed to one scenario makes every cue_sim 1.0 and every
  // feature mean constant, so the whole Mundlak block is redundant with the
  // intercept. The fit proceeds on what remains.
  DgpConfig config = dgp_preset("exchangeable");
  config.n_employees = 600;
  config.catalog = {default_catalog()[0]};
  Prepared p = prepare(config);

  ModelSpec spec;
  spec.kind = EstimatorKind::CreProbit;
  EstimateResult res = estimate(spec, p.panel, p.transitions, nullptr, &p.cre);
  CHECK(res.fit.converged);
  for (const char* name : {"mean_cue_sim", "mean_ann_email", "mean_ann_land",
                           "mean_report_pitch", "mean_emot_heur"}) {
    CHECK(std::find(res.omitted_collinear.begin(), res.omitted_collinear.end(), name) !=
          res.omitted_collinear.end());
    CHECK(res.fit.column(name) < 0);
  }
  CHECK(res.fit.column("y1_click") >= 0);
  CHECK(res.fit.column("n_exposures") >= 0);
}

TEST_CASE("report and safe outcomes demand the initial reporting status") {
  const Prepared& p = calibrated_panel();
  ModelSpec spec;
  spec.kind = EstimatorKind::CreProbit;
  spec.outcome = Outcome::Report;
  CHECK_THROWS_AS(estimate(spec, p.panel, p.transitions, nullptr, &p.cre), ValidationError);

  CreTerms with_report = build_cre_terms(p.panel, p.transitions, p.codes, true);
  CHECK(with_report.includes_initial_report);
  EstimateResult rep = estimate(spec, p.panel, p.transitions, nullptr, &with_report);
  CHECK(rep.fit.converged);
  CHECK(rep.fit.column("y1_report") >= 0);

  spec.outcome = Outcome::Safe;
  EstimateResult safe = estimate(spec, p.panel, p.transitions, nullptr, &with_report);
  CHECK(safe.fit.converged);
  CHECK(safe.apes.overall.estimate >= -1.0);
  CHECK(safe.apes.overall.estimate <= 1.0);
}

TEST_CASE("weighted kinds need weights, employee-level kinds need the block") {
  const Prepared& p = calibrated_panel();
  ModelSpec spec;
  spec.kind = EstimatorKind::MsmCre;
  CHECK_THROWS_AS(estimate(spec, p.panel, p.transitions, nullptr, &p.cre), ValidationError);
  spec.kind = EstimatorKind::CreProbit;
  CHECK_THROWS_AS(estimate(spec, p.panel, p.transitions, nullptr, nullptr), ValidationError);

  WeightSet raw = stabilized_weights(p.panel);
  CHECK(!raw.trimmed());
  spec.kind = EstimatorKind::MsmProbit;
  EstimateResult res = estimate(spec, p.panel, p.transitions, &raw, nullptr);
  REQUIRE(!res.warnings.empty());
  CHECK(res.warnings.front().find("untrimmed") != std::string::npos);
}

TEST_CASE("rescaling every weight by a constant moves nothing") {
  const Prepared& p = calibrated_panel();
  ModelSpec spec;
  spec.kind = EstimatorKind::MsmCre;
  EstimateResult base = estimate(spec, p.panel, p.transitions, &p.weights, &p.cre);

  WeightSet scaled = p.weights;
  for (double& w : scaled.sw) w *= 37.5;
  for (double& w : scaled.sw_trimmed) w *= 37.5;
  EstimateResult moved = estimate(spec, p.panel, p.transitions, &scaled, &p.cre);

  REQUIRE(moved.fit.beta.size() == base.fit.beta.size());
  for (Eigen::Index j = 0; j < base.fit.beta.size(); ++j) {
    CHECK(moved.fit.beta[j] == doctest::Approx(base.fit.beta[j]).epsilon(1e-8));
    CHECK(moved.fit.se(j) == doctest::Approx(base.fit.se(j)).epsilon(1e-8));
  }
  CHECK(overall_ape(moved) == doctest::Approx(overall_ape(base)).epsilon(1e-8));
  CHECK(moved.apes.overall.se == doctest::Approx(base.apes.overall.se).epsilon(1e-8));
}

TEST_CASE("adding the employee-level block never lowers the pseudolikelihood") {
  const Prepared& p = calibrated_panel();
  ModelSpec pooled;
  pooled.kind = EstimatorKind::PooledProbit;
  ModelSpec cre;
  cre.kind = EstimatorKind::CreProbit;
  EstimateResult small = estimate(pooled, p.panel, p.transitions, nullptr, nullptr);
  EstimateResult wide = estimate(cre, p.panel, p.transitions, nullptr, &p.cre);
  CHECK(wide.fit.loglik >= small.fit.loglik - 1e-6);
}

TEST_CASE("probit and logit weighted models tell the same story") {
  const Prepared& p = calibrated_panel();
  ModelSpec probit;
  probit.kind = EstimatorKind::MsmCre;
  ModelSpec logit;
  logit.kind = EstimatorKind::MsmLogit;
  EstimateResult a = estimate(probit, p.panel, p.transitions, &p.weights, &p.cre);
  EstimateResult b = estimate(logit, p.panel, p.transitions, &p.weights, &p.cre);
  CHECK(a.apes.overall.estimate > 0.0);
  CHECK(b.apes.overall.estimate > 0.0);
  double gap = std::fabs(a.apes.overall.estimate - b.apes.overall.estimate);
  CHECK(gap < 1.96 * (a.apes.overall.se + b.apes.overall.se));
}

TEST_CASE("the progression annotates what each column addresses") {
  const Prepared& p = calibrated_panel();
  ProgressionReport report = progression(p.panel, p.transitions, p.weights, p.cre);
  REQUIRE(report.columns.size() == 5);

  const char* names[] = {"fe-lpm", "pooled-probit", "cre-probit", "msm-probit", "msm-cre"};
  const bool het[] = {true, false, true, false, true};
  const bool fb[] = {false, false, false, true, true};
  for (int i = 0; i < 5; ++i) {
    const ProgressionColumn& col = report.columns[static_cast<std::size_t>(i)];
    CHECK(col.name == names[i]);
    CHECK(col.addresses_heterogeneity == het[i]);
    CHECK(col.addresses_feedback == fb[i]);
    CHECK(col.error.empty());
    REQUIRE(col.result.has_value());
  }
  // Every probit-family column finds positive persistence; stripping the
  // stable-susceptibility differences takes most of the naive estimate away.
  double pooled = overall_ape(*report.columns[1].result);
  double cre = overall_ape(*report.columns[2].result);
  double msm = overall_ape(*report.columns[3].result);
  double msm_cre = overall_ape(*report.columns[4].result);
  CHECK(pooled > 0.0);
  CHECK(cre > 0.0);
  CHECK(msm > 0.0);
  CHECK(msm_cre > 0.0);
  CHECK(pooled > cre);
  CHECK(pooled > msm_cre);
  CHECK(msm > msm_cre);
}

TEST_CASE("false persistence is flagged by the ladder on a spurious panel") {
  Prepared p = prepare(dgp_preset("heterogeneity-only"));
  ProgressionReport report = progression(p.panel, p.transitions, p.weights, p.cre);
  REQUIRE(report.columns.size() == 5);
  for (const ProgressionColumn& col : report.columns) REQUIRE(col.result.has_value());

  const EstimateResult& fe = *report.columns[0].result;
  CHECK(fe.fit.beta[fe.layout.treatment_column] < 0.0);

  const ApeEstimate& pooled = report.columns[1].result->apes.overall;
  CHECK(pooled.estimate > 0.0);
  CHECK(pooled.estimate / pooled.se > 2.0);

  const ApeEstimate& msm_cre = report.columns[4].result->apes.overall;
  CHECK(msm_cre.estimate - 1.96 * msm_cre.se < 0.0);
  CHECK(pooled.estimate > msm_cre.estimate);

  // The employee-level block absorbs most of what the weighted-only model
  // still reads as persistence.
  double msm = overall_ape(*report.columns[3].result);
  double cre = overall_ape(*report.columns[2].result);
  CHECK((msm - cre) / msm >= 0.5);
}

TEST_CASE("estimates agree when nothing confounds, up to the within-estimator floor") {
  DgpConfig config = dgp_preset("exchangeable");
  config.n_employees = 1500;
  config.n_campaigns = 40;
  config.state_dependence = 0.3;
  Prepared p = prepare(config);
  ProgressionReport report = progression(p.panel, p.transitions, p.weights, p.cre);
  for (const ProgressionColumn& col : report.columns) REQUIRE(col.result.has_value());

  double apes[4] = {overall_ape(*report.columns[1].result), overall_ape(*report.columns[2].result),
                    overall_ape(*report.columns[3].result),
                    overall_ape(*report.columns[4].result)};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) CHECK(std::fabs(apes[i] - apes[j]) < 0.02);

  // The linear within column never joins the band: demeaning over S observed
  // exposures keeps a bias of about -(1+rho)/(S-1), still near -0.03 with
  // S ~ 36 here, so it sits below the probit family by more than their own
  // spread. The gap itself is the quantity worth pinning.
  const EstimateResult& fe = *report.columns[0].result;
  double fe_coef = fe.fit.beta[fe.layout.treatment_column];
  double gap = apes[0] - fe_coef;
  CHECK(fe_coef < apes[0]);
  CHECK(gap > 0.015);
  CHECK(gap < 0.045);
}

TEST_CASE("the similarity suite recovers the built-in amplification") {
  DgpConfig config = dgp_preset("paper-like");
  config.n_employees = 900;
  config.similarity_interaction = 0.9;
  Prepared p = prepare(config);

  ModelSpec spec;
  spec.kind = EstimatorKind::MsmCre;
  SuiteResult suite =
      interaction_suite(Suite::Similarity, spec, p.panel, p.transitions, &p.weights, &p.cre);

  REQUIRE(suite.joint_terms.size() == 1);
  CHECK(suite.joint_terms[0] == "click_t:cue_sim");
  int ix = suite.main.fit.column("click_t:cue_sim");
  REQUIRE(ix >= 0);
  CHECK(suite.main.fit.beta[ix] > 0.0);

  REQUIRE(suite.joint_interactions.has_value());
  CHECK(suite.joint_interactions->df == 1);
  double z = suite.main.fit.beta[ix] / suite.main.fit.se(ix);
  CHECK(suite.joint_interactions->statistic == doctest::Approx(z * z).epsilon(1e-10));

  // Default grid: endpoints, quartile points, and the sample mean in the
  // middle slot.
  REQUIRE(suite.main.apes.grid.size() == 5);
  double sim_sum = 0.0;
  for (const Transition& t : p.transitions) sim_sum += t.cue_sim;
  double sim_mean = sim_sum / static_cast<double>(p.transitions.size());
  CHECK(suite.main.apes.grid[0].moderator_value.value() == 0.0);
  CHECK(suite.main.apes.grid[1].moderator_value.value() == 0.25);
  CHECK(suite.main.apes.grid[2].moderator_value.value() ==
        doctest::Approx(sim_mean).epsilon(1e-12));
  CHECK(suite.main.apes.grid[4].moderator_value.value() == 1.0);
  CHECK(suite.main.apes.grid[4].estimate > suite.main.apes.grid[0].estimate);

  try {
    wald_test(suite.main.fit, {ix, ix});
    FAIL("duplicated restrictions must not produce a statistic");
  } catch (const ValidationError& err) {
    CHECK(std::string(err.what()).find("click_t:cue_sim") != std::string::npos);
  }

  ModelSpec pinned = spec;
  pinned.similarity_grid = {0.0, 1.0};
  SuiteResult two =
      interaction_suite(Suite::Similarity, pinned, p.panel, p.transitions, &p.weights, &p.cre);
  REQUIRE(two.main.apes.grid.size() == 2);
  CHECK(two.main.apes.grid[1].estimate > two.main.apes.grid[0].estimate);
}

TEST_CASE("the engagement split counts exactly the buffer rows it drops") {
  const Prepared& p = calibrated_panel();
  long long buffer_rows = 0;
  for (const Transition& t : p.transitions)
    if (classify_engagement(t.click_t != 0, t.has_seconds_t, t.education_seconds_t) ==
        Engagement::Buffer)
      ++buffer_rows;
  REQUIRE(buffer_rows > 0);

  ModelSpec spec;
  spec.kind = EstimatorKind::PooledProbit;
  SuiteResult suite =
      interaction_suite(Suite::Engagement, spec, p.panel, p.transitions, nullptr, nullptr);
  CHECK(suite.main.n_excluded == buffer_rows);
  CHECK(suite.main.design.X.rows() ==
        static_cast<Eigen::Index>(p.transitions.size()) - buffer_rows);
  CHECK(suite.main.fit.column("click_dis_t") >= 0);
  CHECK(suite.main.fit.column("click_eng_t") >= 0);
  REQUIRE(suite.engagement_equality.has_value());
  CHECK(suite.engagement_equality->df == 1);
  CHECK(suite.engagement_equality->statistic >= 0.0);
  REQUIRE(suite.extra_apes.size() == 2);
  CHECK(suite.extra_apes[0].first == "click_disengaged");
  CHECK(suite.extra_apes[1].first == "click_engaged");
  CHECK(suite.extra_apes[0].second.overall.estimate == suite.main.apes.overall.estimate);
}

TEST_CASE("design, cue, and framing suites run joint tests over their interactions") {
  const Prepared& p = calibrated_panel();
  ModelSpec spec;
  spec.kind = EstimatorKind::PooledProbit;

  SuiteResult design =
      interaction_suite(Suite::Design, spec, p.panel, p.transitions, nullptr, nullptr);
  REQUIRE(design.joint_terms.size() == 4);
  for (const char* f : {"ann_email", "ann_land", "report_pitch", "emot_heur"})
    CHECK(std::find(design.joint_terms.begin(), design.joint_terms.end(),
                    std::string("click_t:") + f + "_t") != design.joint_terms.end());
  REQUIRE(design.joint_interactions.has_value());
  CHECK(design.joint_interactions->df == 4);
  CHECK(design.joint_interactions->p_value >= 0.0);
  CHECK(design.joint_interactions->p_value <= 1.0);

  SuiteResult cues = interaction_suite(Suite::Cues, spec, p.panel, p.transitions, nullptr, nullptr);
  CHECK(cues.singles.size() == 7);
  for (const SuiteModel& single : cues.singles) {
    CHECK(single.result.fit.converged);
    CHECK(single.result.fit.column("click_t:" + single.label + "_t") >= 0);
  }
  REQUIRE(cues.joint_interactions.has_value());
  CHECK(cues.joint_interactions->df == static_cast<int>(cues.joint_terms.size()));
  CHECK(cues.joint_interactions->df >= 1);

  SuiteResult framing =
      interaction_suite(Suite::CueByEducation, spec, p.panel, p.transitions, nullptr, nullptr);
  CHECK(framing.main.fit.converged);
  if (framing.joint_interactions.has_value()) {
    CHECK(framing.joint_interactions->statistic >= 0.0);
    CHECK(framing.joint_interactions->df == static_cast<int>(framing.joint_terms.size()));
  }
}

TEST_CASE("moderator suites refuse the linear within estimator") {
  const Prepared& p = calibrated_panel();
  ModelSpec spec;
  spec.kind = EstimatorKind::FeLpm;
  CHECK_THROWS_AS(
      interaction_suite(Suite::Similarity, spec, p.panel, p.transitions, nullptr, nullptr),
      ValidationError);
}
