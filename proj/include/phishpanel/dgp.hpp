// Synthetic exposure-panel generator with controllable stable heterogeneity,
// true state dependence, click-triggered feedback, scenario cue structure,
// and a reporting equation, plus a closed-form potential-outcomes oracle.
//
// The click equation is a latent-index model: the propensity at exposure t is
//   intercept + campaign effect + scenario loadings + tenure loading
//   + heterogeneity + state_dependence * lag_click
//   + feedback_loading * cumulative prior clicks
//   + similarity_interaction * lag_click * cue_sim(prev, current)
//   + report_to_click * lag_report
// pushed through the configured link. Reporting has its own latent equation
// driven by the current click, the prior report, the prior click, and a share
// of the same heterogeneity, so click-contingent experiences can confound
// later clicking through the reporting channel.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "phishpanel/glm.hpp"
#include "phishpanel/panel.hpp"
#include "phishpanel/scenario.hpp"

namespace phishpanel {

struct EngagementMix {
  // Conditional on clicking: how the landing-page dwell time is distributed.
  double short_leave = 0.16;  // 1-10 s, counted disengaged
  double timeout = 0.06;      // 300-600 s, counted disengaged
  double engaged = 0.73;      // 20-290 s
  double buffer = 0.05;       // (10,20) or (290,300), excluded by the rule
};

struct DgpConfig {
  int n_employees = 3000;
  int n_campaigns = 12;
  std::uint64_t seed = 20160607;
  Link link = Link::Probit;

  // Campaign calendar and scenario codes; campaigns cycle through the catalog
  // when n_campaigns exceeds it, continuing the calendar at 60-day spacing.
  std::vector<CatalogEntry> catalog = default_catalog();
  double skip_prob = 0.15;  // per employee-campaign; at least one exposure is kept

  // Click equation (latent scale).
  double click_intercept = -1.75;
  double heterogeneity_sd = 0.8;  // SD of the employee intercept
  // Fraction of the heterogeneity variance carried by the employee's
  // standardized attendance count (susceptibility correlated with how often
  // someone is exposed); the rest is idiosyncratic. Requires skip_prob > 0.
  double heterogeneity_attendance_share = 0.0;
  double state_dependence = 0.15;       // loading of the previous click
  double feedback_loading = 0.0;        // loading of cumulative prior clicks
  double similarity_interaction = 0.0;  // loading of lag_click * cue_sim(prev, cur)
  double report_to_click = 0.0;         // loading of the previous report
  double campaign_sd = 0.25;            // SD of campaign effects
  std::array<double, 5> cue_loadings = {0.10, 0.15, 0.05, 0.20, 0.05};
  std::array<double, 2> format_loadings = {0.05, -0.05};
  std::array<double, 5> education_loadings = {0.0, 0.0, 0.0, 0.0, 0.0};
  double tenure_loading = -0.05;  // on standardized log tenure

  // Report equation (latent scale, same link).
  double report_intercept = -1.70;
  double report_click_loading = 0.55;         // current click raises reporting
  double report_state_dependence = 0.60;      // previous report
  double report_lag_click = 0.0;              // previous click
  double report_heterogeneity_loading = 0.0;  // share of the click heterogeneity

  // Burn-in exposure before the first recorded campaign, so initial outcomes
  // correlate with the employee intercept.
  bool burn_in = true;

  EngagementMix engagement;

  void validate() const;
};

// Named parameter sets used throughout the tests:
//   paper-like        heterogeneity + reporting-channel feedback + similarity,
//                     calibrated toward the published raw transition cells
//   paper-like-full   the same at full panel size (19,341 x 17)
//   heterogeneity-only  no causal channel at all; persistence is spurious
//   exchangeable      no heterogeneity, no state dependence, no feedback
//   short-panel       few campaigns, strong heterogeneity, positive state dependence
DgpConfig dgp_preset(const std::string& name);
std::vector<std::string> dgp_preset_names();

// Scenario codes covering every scenario id the simulated panel can contain.
std::vector<ScenarioCode> dgp_scenario_codes(const DgpConfig& config);

PanelDataset simulate_panel(const DgpConfig& config);

struct OracleApe {
  double estimate = 0.0;
  double se = 0.0;  // Monte Carlo SE across replications
};

struct DgpTruth {
  OracleApe click;   // effect of a click on clicking at the next exposure
  OracleApe report;  // ... on reporting at the next exposure
  OracleApe safe;    // ... on safe behavior (report and no click) at the next exposure
  std::vector<std::pair<double, OracleApe>> click_by_similarity;  // at pinned cue_sim
  int replications = 0;
  long long histories = 0;  // employee transitions averaged per replication
};

// Brute-force potential-outcomes oracle: simulates `replications` fresh
// panels, and for every adjacent exposure pair evaluates both potential
// next-exposure outcomes under do(click=1) and do(click=0) holding the
// history fixed, enumerating the intermediate report. Requires
// replications * n_employees >= 10,000 paths.
DgpTruth oracle_ape(const DgpConfig& config, int replications,
                    const std::vector<double>& similarity_grid = {});

}  // namespace phishpanel
