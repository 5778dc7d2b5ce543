// Exposure panel: ingestion of the long-format exposure CSV, within-employee
// ordering, per-exposure history construction, and the transition dataset
// (adjacent exposure pairs) every estimator runs on.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "phishpanel/csv.hpp"
#include "phishpanel/scenario.hpp"

namespace phishpanel {

// Days since 1970-01-01 from an ISO-8601 date and back.
int iso_to_days(const std::string& iso);
std::string days_to_iso(int days);

struct EmployeeBaseline {
  std::string role;
  std::string job_status;
  std::string org_unit;
  double tenure_days = 0.0;
  bool tenure_missing = true;
};

struct Employee {
  std::string id;
  EmployeeBaseline baseline;  // taken from the first exposure's row
  std::size_t begin = 0, end = 0;  // exposure span, half open
};

struct Exposure {
  int employee = 0;  // index into PanelDataset::employees
  int campaign_id = 0;
  int scenario_id = 0;
  int sent_days = 0;
  int clicked = 0;
  int reported = 0;
  double education_seconds = 0.0;
  bool has_seconds = false;

  // Histories, relative to this exposure. Strictly from earlier exposures.
  int order = 0;  // 1-based within employee
  int first_exposure = 0;
  int lag_click = 0;
  int lag_report = 0;
  int cum_clicks = 0;   // clicks before this exposure
  int cum_reports = 0;  // reports before this exposure
  int gap_days = 0;     // days since prior exposure, 0 at the first
};

struct PanelDataset {
  std::vector<Employee> employees;
  std::vector<Exposure> exposures;  // sorted by (employee, sent_days, campaign)

  std::size_t n_employees() const { return employees.size(); }
  std::size_t n_exposures() const { return exposures.size(); }
  std::size_t n_transitions() const { return exposures.size() - employees.size(); }
};

PanelDataset ingest_exposures(const CsvTable& table);
PanelDataset read_panel_csv(const std::string& path);

// Canonical exposure CSV, identical column set to the input format, so that
// re-ingesting an emitted panel reproduces the dataset exactly.
void write_panel_csv(std::ostream& out, const PanelDataset& panel);

struct Transition {
  int employee = 0;
  int t = 0;  // order of the treatment exposure
  std::size_t exp_t = 0, exp_next = 0;  // indices into PanelDataset::exposures
  int campaign_t = 0, campaign_next = 0;
  int scenario_t = 0, scenario_next = 0;
  int click_t = 0, report_t = 0;
  int click_next = 0, report_next = 0, safe_next = 0;
  double education_seconds_t = 0.0;
  bool has_seconds_t = false;
  double cue_sim = 0.0;  // cue-layer Jaccard between the two scenarios
  const ScenarioCode* code_t = nullptr;
  const ScenarioCode* code_next = nullptr;
  int consecutive = 0;  // next campaign immediately follows the current one
};

// One record per adjacent exposure pair per employee. Every scenario id in
// the panel must have a code; pass consecutive_only to keep only pairs of
// adjacent campaign numbers.
std::vector<Transition> build_transitions(const PanelDataset& panel,
                                          const std::vector<ScenarioCode>& codes,
                                          bool consecutive_only = false);

void write_transitions_csv(std::ostream& out, const PanelDataset& panel,
                           const std::vector<Transition>& transitions);

struct TransitionRates {
  // Pr(click at t+1 | click at t = a), a in {0,1}; absent when the
  // conditioning cell is empty.
  std::optional<double> click_next_given_click[2];
  std::optional<double> report_next_given_report[2];
  std::size_t n = 0;
};

TransitionRates transition_rates(const std::vector<Transition>& transitions);

struct EngagementRule {
  double disengaged_max = 10.0;  // at or below: disengaged
  double engaged_min = 20.0;
  double engaged_max = 290.0;
  double timeout = 300.0;  // at or above: timed out, counted disengaged
};

enum class Engagement { NotClicked, Disengaged, Engaged, Buffer };

Engagement classify_engagement(bool clicked, bool has_seconds, double seconds,
                               const EngagementRule& rule = {});

}  // namespace phishpanel
