#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "phishpanel/dgp.hpp"
#include "phishpanel/errors.hpp"
#include "phishpanel/panel.hpp"

using namespace phishpanel;

namespace {

std::string panel_bytes(const PanelDataset& panel) {
  std::ostringstream out;
  write_panel_csv(out, panel);
  return out.str();
}

TransitionRates preset_rates(const DgpConfig& config) {
  PanelDataset panel = simulate_panel(config);
  auto transitions = build_transitions(panel, dgp_scenario_codes(config));
  return transition_rates(transitions);
}

}  // namespace

TEST_CASE("the same seed reproduces the panel byte for byte") {
  DgpConfig config = dgp_preset("short-panel");
  config.n_employees = 300;
  PanelDataset a = simulate_panel(config);
  PanelDataset b = simulate_panel(config);
  CHECK(panel_bytes(a) == panel_bytes(b));
  config.seed += 1;
  PanelDataset c = simulate_panel(config);
  CHECK(panel_bytes(a) != panel_bytes(c));
}

TEST_CASE("every simulated panel satisfies the structural identities") {
  for (const auto& name : {"paper-like", "exchangeable", "short-panel"}) {
    DgpConfig config = dgp_preset(name);
    config.n_employees = 500;
    PanelDataset panel = simulate_panel(config);
    CHECK(panel.n_employees() == 500);
    auto transitions = build_transitions(panel, dgp_scenario_codes(config));
    CHECK(transitions.size() == panel.n_exposures() - panel.n_employees());
    for (const auto& tr : transitions)
      CHECK(tr.safe_next == ((tr.report_next == 1 && tr.click_next == 0) ? 1 : 0));
    for (const auto& e : panel.exposures) {
      if (e.clicked) CHECK(e.has_seconds);
      else CHECK_FALSE(e.has_seconds);
    }
  }
}

TEST_CASE("exchangeable clicking shows no spurious persistence") {
  DgpConfig config = dgp_preset("exchangeable");
  TransitionRates rates = preset_rates(config);
  REQUIRE(rates.click_next_given_click[0].has_value());
  REQUIRE(rates.click_next_given_click[1].has_value());
  double p0 = *rates.click_next_given_click[0];
  double p1 = *rates.click_next_given_click[1];
  // Counts in the clicked cell are roughly rate * n; three binomial SEs.
  double n1 = double(rates.n) * p0;
  double se = std::sqrt(p1 * (1 - p1) / n1 + p0 * (1 - p0) / double(rates.n));
  CHECK(std::fabs(p1 - p0) < 3.0 * se);
}

TEST_CASE("persistence cells match the published transition table") {
  DgpConfig config = dgp_preset("paper-like");
  TransitionRates rates = preset_rates(config);
  double p11 = *rates.click_next_given_click[1];
  double p10 = *rates.click_next_given_click[0];
  CHECK(p11 > 0.2004 - 0.02);
  CHECK(p11 < 0.2004 + 0.02);
  CHECK(p10 > 0.0925 - 0.02);
  CHECK(p10 < 0.0925 + 0.02);
}

TEST_CASE("the oracle is null when no causal channel exists") {
  DgpConfig config = dgp_preset("exchangeable");
  config.n_employees = 1500;
  DgpTruth truth = oracle_ape(config, 8);
  CHECK(truth.replications == 8);
  // With state dependence, feedback, and the similarity interaction all zero,
  // the two counterfactual click probabilities are the same expression, so the
  // enumerated contrast is zero to machine precision, not just within noise.
  CHECK(std::fabs(truth.click.estimate) < 1e-12);
  CHECK(truth.histories > 0);
}

TEST_CASE("the oracle grows with the state-dependence loading") {
  DgpConfig config = dgp_preset("exchangeable");
  config.n_employees = 1500;
  double last = -1.0;
  for (double psi : {0.0, 0.3, 0.6}) {
    config.state_dependence = psi;
    DgpTruth truth = oracle_ape(config, 8);
    CHECK(truth.click.estimate > last);
    last = truth.click.estimate;
  }
}

TEST_CASE("a positive similarity interaction separates the oracle by cue overlap") {
  DgpConfig config = dgp_preset("exchangeable");
  config.n_employees = 1500;
  config.state_dependence = 0.15;
  config.similarity_interaction = 0.6;
  DgpTruth truth = oracle_ape(config, 8, {0.0, 1.0});
  REQUIRE(truth.click_by_similarity.size() == 2);
  CHECK(truth.click_by_similarity[0].first == 0.0);
  CHECK(truth.click_by_similarity[1].first == 1.0);
  CHECK(truth.click_by_similarity[1].second.estimate >
        truth.click_by_similarity[0].second.estimate);
}

TEST_CASE("the calibrated oracle is positive, moderate, and seed stable") {
  DgpConfig config = dgp_preset("paper-like");
  DgpTruth a = oracle_ape(config, 6);
  CHECK(a.click.estimate > 0.0);
  CHECK(a.click.estimate < 0.12);
  config.seed = 99;
  DgpTruth b = oracle_ape(config, 6);
  double gap_se = std::sqrt(a.click.se * a.click.se + b.click.se * b.click.se);
  CHECK(std::fabs(a.click.estimate - b.click.estimate) < 3.0 * gap_se);
}

TEST_CASE("presets are named and invalid configs are rejected") {
  auto names = dgp_preset_names();
  for (const auto& name : {"paper-like", "paper-like-full", "heterogeneity-only",
                           "exchangeable", "short-panel"})
    CHECK(std::find(names.begin(), names.end(), name) != names.end());
  CHECK_THROWS_AS(dgp_preset("reference"), ValidationError);

  DgpConfig config;
  config.n_employees = 1;
  CHECK_THROWS_AS(simulate_panel(config), ValidationError);
  config = DgpConfig{};
  config.skip_prob = 1.0;
  CHECK_THROWS_AS(simulate_panel(config), ValidationError);
  config = DgpConfig{};
  config.heterogeneity_attendance_share = 1.4;
  CHECK_THROWS_AS(simulate_panel(config), ValidationError);
  config = DgpConfig{};
  config.heterogeneity_attendance_share = 0.5;
  config.skip_prob = 0.0;
  CHECK_THROWS_AS(simulate_panel(config), ValidationError);
}

TEST_CASE("paper-like-full scales the panel, not the mechanics") {
  DgpConfig desk = dgp_preset("paper-like");
  DgpConfig full = dgp_preset("paper-like-full");
  CHECK(full.n_employees == 19341);
  CHECK(full.n_campaigns == 17);
  CHECK(desk.n_employees == 3000);
  CHECK(desk.n_campaigns == 12);
  CHECK(full.click_intercept == desk.click_intercept);
  CHECK(full.heterogeneity_sd == desk.heterogeneity_sd);
  CHECK(full.state_dependence == desk.state_dependence);
}
