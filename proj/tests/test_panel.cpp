#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "phishpanel/errors.hpp"
#include "phishpanel/panel.hpp"
#include "phishpanel/rng.hpp"
#include "phishpanel/scenario.hpp"

using namespace phishpanel;

namespace {

std::vector<ScenarioCode> catalog_codes() {
  std::vector<ScenarioCode> codes;
  for (const auto& e : default_catalog()) codes.push_back(e.code);
  return codes;
}

// A panel with the given employee sizes, one exposure per campaign in order,
// built directly so the transition-count identity can be checked at scale.
PanelDataset uniform_panel(const std::vector<int>& sizes) {
  PanelDataset panel;
  const auto& catalog = default_catalog();
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    Employee emp;
    emp.id = "e" + std::to_string(i);
    emp.begin = panel.exposures.size();
    for (int k = 0; k < sizes[i]; ++k) {
      Exposure e;
      e.employee = static_cast<int>(i);
      e.campaign_id = catalog[static_cast<std::size_t>(k)].campaign;
      e.scenario_id = catalog[static_cast<std::size_t>(k)].code.scenario_id;
      e.sent_days = 17000 + 30 * k;
      panel.exposures.push_back(e);
    }
    emp.end = panel.exposures.size();
    panel.employees.push_back(std::move(emp));
  }
  return panel;
}

const char* kHeader =
    "employee_id,campaign_id,scenario_id,sent_at,clicked,reported,"
    "education_seconds,role,job_status,org_unit,tenure_days\n";

}  // namespace

TEST_CASE("iso dates round-trip and reject malformed input") {
  CHECK(days_to_iso(iso_to_days("2016-06-07")) == "2016-06-07");
  CHECK(days_to_iso(iso_to_days("2020-02-29")) == "2020-02-29");
  CHECK(iso_to_days("2016-06-08") - iso_to_days("2016-06-07") == 1);
  CHECK(iso_to_days("1970-01-01") == 0);
  CHECK_THROWS_AS(iso_to_days("2016/06/07"), ParseError);
  CHECK_THROWS_AS(iso_to_days("2016-13-01"), ParseError);
  CHECK_THROWS_AS(iso_to_days("junk"), ParseError);
}

TEST_CASE("ingestion orders exposures by date and builds histories") {
  std::istringstream in(std::string(kHeader) +
                        "a,3,30,2016-08-21,1,0,45,analyst,full,ops,1200\n"
                        "a,1,28,2016-06-07,1,0,12,analyst,full,ops,1200\n"
                        "a,2,29,2016-07-07,0,1,,analyst,full,ops,1200\n");
  PanelDataset panel = ingest_exposures(read_csv(in));
  REQUIRE(panel.n_employees() == 1);
  REQUIRE(panel.n_exposures() == 3);
  CHECK(panel.n_transitions() == 2);
  const auto& x = panel.exposures;
  CHECK(x[0].campaign_id == 1);
  CHECK(x[1].campaign_id == 2);
  CHECK(x[2].campaign_id == 3);
  CHECK(x[0].order == 1);
  CHECK(x[0].first_exposure == 1);
  CHECK(x[1].first_exposure == 0);
  CHECK(x[0].lag_click == 0);
  CHECK(x[1].lag_click == 1);
  CHECK(x[2].lag_click == 0);
  CHECK(x[2].lag_report == 1);
  CHECK(x[0].cum_clicks == 0);
  CHECK(x[1].cum_clicks == 1);
  CHECK(x[2].cum_clicks == 1);
  CHECK(x[2].cum_reports == 1);
  CHECK(x[0].gap_days == 0);
  CHECK(x[1].gap_days == 30);
  CHECK(x[2].gap_days == 45);
  CHECK(x[1].has_seconds == false);
  CHECK(x[0].education_seconds == 12.0);
}

TEST_CASE("ingestion validation rejects bad rows") {
  std::string dup = std::string(kHeader) +
                    "a,1,28,2016-06-07,0,0,,r,f,o,\n"
                    "a,1,28,2016-06-08,0,0,,r,f,o,\n";
  std::istringstream dup_in(dup);
  CHECK_THROWS_AS(ingest_exposures(read_csv(dup_in)), ValidationError);

  std::string secs = std::string(kHeader) + "a,1,28,2016-06-07,0,0,33,r,f,o,\n";
  std::istringstream secs_in(secs);
  CHECK_THROWS_AS(ingest_exposures(read_csv(secs_in)), ValidationError);

  std::string date = std::string(kHeader) + "a,1,28,06/07/2016,0,0,,r,f,o,\n";
  std::istringstream date_in(date);
  CHECK_THROWS_AS(ingest_exposures(read_csv(date_in)), ParseError);

  std::string flag = std::string(kHeader) + "a,1,28,2016-06-07,2,0,,r,f,o,\n";
  std::istringstream flag_in(flag);
  CHECK_THROWS_AS(ingest_exposures(read_csv(flag_in)), ParseError);
}

TEST_CASE("a written panel re-ingests identically") {
  std::istringstream in(std::string(kHeader) +
                        "b,1,28,2016-06-07,1,0,88.5,clerk,part,hr,\n"
                        "b,2,29,2016-07-11,0,0,,clerk,part,hr,\n"
                        "a,2,29,2016-07-11,0,1,,analyst,full,ops,450\n"
                        "a,1,28,2016-06-07,0,0,,analyst,full,ops,450\n");
  PanelDataset panel = ingest_exposures(read_csv(in));
  std::ostringstream out;
  write_panel_csv(out, panel);
  std::istringstream back(out.str());
  PanelDataset again = ingest_exposures(read_csv(back));
  REQUIRE(again.n_exposures() == panel.n_exposures());
  for (std::size_t i = 0; i < panel.n_exposures(); ++i) {
    CHECK(again.exposures[i].campaign_id == panel.exposures[i].campaign_id);
    CHECK(again.exposures[i].clicked == panel.exposures[i].clicked);
    CHECK(again.exposures[i].reported == panel.exposures[i].reported);
    CHECK(again.exposures[i].sent_days == panel.exposures[i].sent_days);
    CHECK(again.exposures[i].education_seconds == panel.exposures[i].education_seconds);
  }
  CHECK(again.employees[0].id == "a");
  CHECK(again.employees[0].baseline.tenure_days == 450.0);
  CHECK(again.employees[1].baseline.tenure_missing);
}

TEST_CASE("transition count equals exposures minus employees at scale") {
  // 18,771 ten-exposure employees plus 570 nine-exposure employees.
  std::vector<int> sizes(19341, 10);
  for (std::size_t i = 18771; i < sizes.size(); ++i) sizes[i] = 9;
  PanelDataset panel = uniform_panel(sizes);
  CHECK(panel.n_exposures() == 192840);
  CHECK(panel.n_transitions() == 173499);
  auto transitions = build_transitions(panel, catalog_codes());
  CHECK(transitions.size() == 173499);
}

TEST_CASE("transition identity holds on random panels") {
  RngStream rng(2024, 0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<int> sizes(20 + static_cast<int>(rng.next_below(40)));
    for (auto& s : sizes) s = 1 + static_cast<int>(rng.next_below(8));
    PanelDataset panel = uniform_panel(sizes);
    auto transitions = build_transitions(panel, catalog_codes());
    CHECK(transitions.size() == panel.n_exposures() - panel.n_employees());
    CHECK(transitions.size() == panel.n_transitions());
  }
}

TEST_CASE("consecutive-only filtering keeps adjacent campaign pairs") {
  std::istringstream in(std::string(kHeader) +
                        "a,1,28,2016-06-07,0,0,,r,f,o,\n"
                        "a,2,29,2016-07-11,0,0,,r,f,o,\n"
                        "a,4,32,2016-08-17,0,0,,r,f,o,\n");
  PanelDataset panel = ingest_exposures(read_csv(in));
  auto all = build_transitions(panel, catalog_codes());
  REQUIRE(all.size() == 2);
  CHECK(all[0].consecutive == 1);
  CHECK(all[1].consecutive == 0);
  auto adjacent = build_transitions(panel, catalog_codes(), true);
  REQUIRE(adjacent.size() == 1);
  CHECK(adjacent[0].campaign_t == 1);
  CHECK(adjacent[0].campaign_next == 2);
}

TEST_CASE("transitions refuse scenarios with no code") {
  std::istringstream in(std::string(kHeader) +
                        "a,1,999,2016-06-07,0,0,,r,f,o,\n"
                        "a,2,29,2016-07-11,0,0,,r,f,o,\n");
  PanelDataset panel = ingest_exposures(read_csv(in));
  CHECK_THROWS_AS(build_transitions(panel, catalog_codes()), ValidationError);
}

TEST_CASE("engagement classification boundaries") {
  CHECK(classify_engagement(false, false, 0.0) == Engagement::NotClicked);
  CHECK(classify_engagement(true, true, 5.0) == Engagement::Disengaged);
  CHECK(classify_engagement(true, true, 10.0) == Engagement::Disengaged);
  CHECK(classify_engagement(true, true, 15.0) == Engagement::Buffer);
  CHECK(classify_engagement(true, true, 20.0) == Engagement::Engaged);
  CHECK(classify_engagement(true, true, 150.0) == Engagement::Engaged);
  CHECK(classify_engagement(true, true, 290.0) == Engagement::Engaged);
  CHECK(classify_engagement(true, true, 295.0) == Engagement::Buffer);
  CHECK(classify_engagement(true, true, 300.0) == Engagement::Disengaged);
  CHECK(classify_engagement(true, true, 1000.0) == Engagement::Disengaged);
  CHECK_THROWS_AS(classify_engagement(true, false, 0.0), ValidationError);
}

TEST_CASE("safe handling decomposes into reporting among non-clickers") {
  // Two arms of 100 employees. Next-exposure joint outcomes per arm:
  // click+report, click only, report only (safe), neither.
  int control[4] = {1, 8, 6, 85};
  int treated[4] = {1, 9, 8, 82};
  std::ostringstream csv;
  csv << kHeader;
  auto emit_arm = [&](const char* prefix, int click_t, const int cells[4]) {
    int idx = 0;
    auto emit = [&](int n, int click_next, int report_next) {
      for (int i = 0; i < n; ++i, ++idx) {
        csv << prefix << idx << ",1,28,2016-06-07," << click_t << ",0,"
            << (click_t ? "30" : "") << ",r,f,o,\n";
        csv << prefix << idx << ",2,29,2016-07-11," << click_next << ","
            << report_next << "," << (click_next ? "30" : "") << ",r,f,o,\n";
      }
    };
    emit(cells[0], 1, 1);
    emit(cells[1], 1, 0);
    emit(cells[2], 0, 1);
    emit(cells[3], 0, 0);
  };
  emit_arm("c", 0, control);
  emit_arm("t", 1, treated);
  std::istringstream in(csv.str());
  PanelDataset panel = ingest_exposures(read_csv(in));
  REQUIRE(panel.n_employees() == 200);
  auto transitions = build_transitions(panel, catalog_codes());
  REQUIRE(transitions.size() == 200);

  for (int arm = 0; arm < 2; ++arm) {
    long n = 0, n_safe = 0, n_nonclick = 0, n_report_nonclick = 0;
    for (const auto& tr : transitions) {
      if (tr.click_t != arm) continue;
      ++n;
      n_safe += tr.safe_next;
      if (!tr.click_next) {
        ++n_nonclick;
        n_report_nonclick += tr.report_next;
      }
    }
    REQUIRE(n == 100);
    CHECK(n_safe == (arm ? 8 : 6));
    CHECK(n_nonclick == (arm ? 90 : 91));
    // Pr(safe) = Pr(report | no click) * Pr(no click), exactly.
    CHECK(n_safe == n_report_nonclick);
    double lhs = double(n_safe) / double(n);
    double rhs = (double(n_report_nonclick) / double(n_nonclick)) *
                 (double(n_nonclick) / double(n));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-15));
  }

  TransitionRates rates = transition_rates(transitions);
  REQUIRE(rates.click_next_given_click[0].has_value());
  REQUIRE(rates.click_next_given_click[1].has_value());
  CHECK(*rates.click_next_given_click[0] == doctest::Approx(0.09));
  CHECK(*rates.click_next_given_click[1] == doctest::Approx(0.10));
  CHECK_FALSE(rates.report_next_given_report[1].has_value());
  CHECK(rates.n == 200);
}
