#include "phishpanel/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <ostream>
#include <unordered_set>

#include "phishpanel/errors.hpp"
#include "phishpanel/similarity.hpp"

namespace phishpanel {

namespace {

// Civil-date conversion via the standard days-from-civil algorithm.
int days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  int era = (y >= 0 ? y : y - 399) / 400;
  unsigned yoe = static_cast<unsigned>(y - era * 400);
  unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                 static_cast<unsigned>(d) - 1u;
  unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<int>(doe) - 719468;
}

void civil_from_days(int z, int& y, int& m, int& d) {
  z += 719468;
  int era = (z >= 0 ? z : z - 146096) / 146097;
  unsigned doe = static_cast<unsigned>(z - era * 146097);
  unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int>(yoe) + era * 400;
  unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y += m <= 2;
}

int parse_int_field(const std::string& value, const char* what, std::size_t line_no) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ParseError("line " + std::to_string(line_no) + ": " + what +
                     " must be an integer, got '" + value + "'");
  return out;
}

double parse_double_field(const std::string& value, const char* what,
                          std::size_t line_no) {
  try {
    std::size_t pos = 0;
    double out = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": " + what +
                     " must be numeric, got '" + value + "'");
  }
}

int parse_binary_field(const std::string& value, const char* what,
                       std::size_t line_no) {
  if (value == "0") return 0;
  if (value == "1") return 1;
  throw ParseError("line " + std::to_string(line_no) + ": " + what +
                   " must be 0 or 1, got '" + value + "'");
}

void fill_histories(PanelDataset& panel) {
  for (auto& emp : panel.employees) {
    int cum_clicks = 0, cum_reports = 0;
    int prev_click = 0, prev_report = 0, prev_days = 0;
    for (std::size_t i = emp.begin; i < emp.end; ++i) {
      Exposure& e = panel.exposures[i];
      bool first = (i == emp.begin);
      e.order = static_cast<int>(i - emp.begin) + 1;
      e.first_exposure = first ? 1 : 0;
      e.lag_click = first ? 0 : prev_click;
      e.lag_report = first ? 0 : prev_report;
      e.cum_clicks = cum_clicks;
      e.cum_reports = cum_reports;
      e.gap_days = first ? 0 : e.sent_days - prev_days;
      cum_clicks += e.clicked;
      cum_reports += e.reported;
      prev_click = e.clicked;
      prev_report = e.reported;
      prev_days = e.sent_days;
    }
  }
}

}  // namespace

int iso_to_days(const std::string& iso) {
  int y, m, d;
  if (std::sscanf(iso.c_str(), "%4d-%2d-%2d", &y, &m, &d) != 3 ||
      iso.size() != 10 || iso[4] != '-' || iso[7] != '-' || m < 1 || m > 12 ||
      d < 1 || d > 31)
    throw ParseError("invalid ISO date '" + iso + "'");
  return days_from_civil(y, m, d);
}

std::string days_to_iso(int days) {
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
  return buf;
}

PanelDataset ingest_exposures(const CsvTable& table) {
  int c_emp = table.require_column("employee_id");
  int c_camp = table.require_column("campaign_id");
  int c_scen = table.require_column("scenario_id");
  int c_date = table.require_column("sent_at");
  int c_click = table.require_column("clicked");
  int c_report = table.require_column("reported");
  int c_secs = table.require_column("education_seconds");
  int c_role = table.require_column("role");
  int c_job = table.require_column("job_status");
  int c_org = table.require_column("org_unit");
  int c_tenure = table.require_column("tenure_days");

  struct RawRow {
    Exposure exposure;
    EmployeeBaseline baseline;
  };
  std::map<std::string, std::vector<RawRow>> by_employee;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::size_t line_no = table.line_numbers[r];
    const std::string& emp_id = row[c_emp];
    if (emp_id.empty())
      throw ParseError("line " + std::to_string(line_no) + ": empty employee_id");
    if (row[c_camp].empty())
      throw ParseError("line " + std::to_string(line_no) + ": empty campaign_id");

    RawRow raw;
    Exposure& e = raw.exposure;
    e.campaign_id = parse_int_field(row[c_camp], "campaign_id", line_no);
    e.scenario_id = parse_int_field(row[c_scen], "scenario_id", line_no);
    try {
      e.sent_days = iso_to_days(row[c_date]);
    } catch (const ParseError&) {
      throw ParseError("line " + std::to_string(line_no) + ": invalid sent_at '" +
                       row[c_date] + "'");
    }
    e.clicked = parse_binary_field(row[c_click], "clicked", line_no);
    e.reported = parse_binary_field(row[c_report], "reported", line_no);
    if (!row[c_secs].empty()) {
      e.education_seconds = parse_double_field(row[c_secs], "education_seconds", line_no);
      e.has_seconds = true;
      if (e.education_seconds < 0)
        throw ParseError("line " + std::to_string(line_no) +
                         ": education_seconds must be nonnegative");
      if (!e.clicked)
        throw ValidationError("line " + std::to_string(line_no) +
                              ": education_seconds present without a click");
    }
    raw.baseline.role = row[c_role];
    raw.baseline.job_status = row[c_job];
    raw.baseline.org_unit = row[c_org];
    if (!row[c_tenure].empty()) {
      raw.baseline.tenure_days = parse_double_field(row[c_tenure], "tenure_days", line_no);
      raw.baseline.tenure_missing = false;
    }
    by_employee[emp_id].push_back(std::move(raw));
  }

  PanelDataset panel;
  for (auto& [emp_id, rows] : by_employee) {
    std::stable_sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) {
      if (a.exposure.sent_days != b.exposure.sent_days)
        return a.exposure.sent_days < b.exposure.sent_days;
      return a.exposure.campaign_id < b.exposure.campaign_id;
    });
    std::unordered_set<int> seen_campaigns;
    for (const auto& raw : rows)
      if (!seen_campaigns.insert(raw.exposure.campaign_id).second)
        throw ValidationError("employee '" + emp_id + "' has duplicate exposure in campaign " +
                              std::to_string(raw.exposure.campaign_id));
    Employee emp;
    emp.id = emp_id;
    emp.baseline = rows.front().baseline;
    emp.begin = panel.exposures.size();
    int emp_index = static_cast<int>(panel.employees.size());
    for (auto& raw : rows) {
      raw.exposure.employee = emp_index;
      panel.exposures.push_back(raw.exposure);
    }
    emp.end = panel.exposures.size();
    panel.employees.push_back(std::move(emp));
  }
  fill_histories(panel);
  return panel;
}

PanelDataset read_panel_csv(const std::string& path) {
  return ingest_exposures(read_csv_file(path));
}

void write_panel_csv(std::ostream& out, const PanelDataset& panel) {
  write_csv_row(out, {"employee_id", "campaign_id", "scenario_id", "sent_at",
                      "clicked", "reported", "education_seconds", "role",
                      "job_status", "org_unit", "tenure_days"});
  char buf[32];
  for (const auto& emp : panel.employees) {
    for (std::size_t i = emp.begin; i < emp.end; ++i) {
      const Exposure& e = panel.exposures[i];
      std::string secs;
      if (e.has_seconds) {
        std::snprintf(buf, sizeof buf, "%g", e.education_seconds);
        secs = buf;
      }
      std::string tenure;
      if (!emp.baseline.tenure_missing) {
        std::snprintf(buf, sizeof buf, "%g", emp.baseline.tenure_days);
        tenure = buf;
      }
      write_csv_row(out, {emp.id, std::to_string(e.campaign_id),
                          std::to_string(e.scenario_id), days_to_iso(e.sent_days),
                          std::to_string(e.clicked), std::to_string(e.reported), secs,
                          emp.baseline.role, emp.baseline.job_status,
                          emp.baseline.org_unit, tenure});
    }
  }
}

std::vector<Transition> build_transitions(const PanelDataset& panel,
                                          const std::vector<ScenarioCode>& codes,
                                          bool consecutive_only) {
  std::vector<Transition> transitions;
  transitions.reserve(panel.n_transitions());
  for (const auto& emp : panel.employees) {
    for (std::size_t i = emp.begin; i + 1 < emp.end; ++i) {
      const Exposure& cur = panel.exposures[i];
      const Exposure& nxt = panel.exposures[i + 1];
      if (consecutive_only && nxt.campaign_id != cur.campaign_id + 1) continue;
      Transition tr;
      tr.employee = cur.employee;
      tr.t = cur.order;
      tr.exp_t = i;
      tr.exp_next = i + 1;
      tr.campaign_t = cur.campaign_id;
      tr.campaign_next = nxt.campaign_id;
      tr.scenario_t = cur.scenario_id;
      tr.scenario_next = nxt.scenario_id;
      tr.click_t = cur.clicked;
      tr.report_t = cur.reported;
      tr.click_next = nxt.clicked;
      tr.report_next = nxt.reported;
      tr.safe_next = (nxt.reported == 1 && nxt.clicked == 0) ? 1 : 0;
      tr.education_seconds_t = cur.education_seconds;
      tr.has_seconds_t = cur.has_seconds;
      tr.code_t = find_scenario(codes, cur.scenario_id);
      tr.code_next = find_scenario(codes, nxt.scenario_id);
      if (!tr.code_t)
        throw ValidationError("no scenario code for scenario " +
                              std::to_string(cur.scenario_id));
      if (!tr.code_next)
        throw ValidationError("no scenario code for scenario " +
                              std::to_string(nxt.scenario_id));
      tr.cue_sim = jaccard(*tr.code_t, *tr.code_next, FeatureLayer::Cues);
      tr.consecutive = (nxt.campaign_id == cur.campaign_id + 1) ? 1 : 0;
      transitions.push_back(tr);
    }
  }
  return transitions;
}

void write_transitions_csv(std::ostream& out, const PanelDataset& panel,
                           const std::vector<Transition>& transitions) {
  write_csv_row(out, {"employee_id", "t", "campaign_t", "campaign_next",
                      "scenario_t", "scenario_next", "click_t", "report_t",
                      "click_next", "report_next", "safe_next", "lag_click",
                      "lag_report", "cum_clicks", "cum_reports", "gap_days",
                      "first_exposure", "education_seconds_t", "cue_sim",
                      "consecutive"});
  char buf[32];
  for (const auto& tr : transitions) {
    const Exposure& e = panel.exposures[tr.exp_t];
    std::string secs;
    if (tr.has_seconds_t) {
      std::snprintf(buf, sizeof buf, "%g", tr.education_seconds_t);
      secs = buf;
    }
    std::snprintf(buf, sizeof buf, "%.10g", tr.cue_sim);
    write_csv_row(out, {panel.employees[tr.employee].id, std::to_string(tr.t),
                        std::to_string(tr.campaign_t), std::to_string(tr.campaign_next),
                        std::to_string(tr.scenario_t), std::to_string(tr.scenario_next),
                        std::to_string(tr.click_t), std::to_string(tr.report_t),
                        std::to_string(tr.click_next), std::to_string(tr.report_next),
                        std::to_string(tr.safe_next), std::to_string(e.lag_click),
                        std::to_string(e.lag_report), std::to_string(e.cum_clicks),
                        std::to_string(e.cum_reports), std::to_string(e.gap_days),
                        std::to_string(e.first_exposure), secs, buf,
                        std::to_string(tr.consecutive)});
  }
}

TransitionRates transition_rates(const std::vector<Transition>& transitions) {
  if (transitions.empty())
    throw ValidationError("transition_rates requires a nonempty transition set");
  TransitionRates rates;
  rates.n = transitions.size();
  long long click_n[2] = {0, 0}, click_hits[2] = {0, 0};
  long long report_n[2] = {0, 0}, report_hits[2] = {0, 0};
  for (const auto& tr : transitions) {
    click_n[tr.click_t]++;
    click_hits[tr.click_t] += tr.click_next;
    report_n[tr.report_t]++;
    report_hits[tr.report_t] += tr.report_next;
  }
  for (int a = 0; a < 2; ++a) {
    if (click_n[a] > 0)
      rates.click_next_given_click[a] =
          static_cast<double>(click_hits[a]) / static_cast<double>(click_n[a]);
    if (report_n[a] > 0)
      rates.report_next_given_report[a] =
          static_cast<double>(report_hits[a]) / static_cast<double>(report_n[a]);
  }
  return rates;
}

Engagement classify_engagement(bool clicked, bool has_seconds, double seconds,
                               const EngagementRule& rule) {
  if (!clicked) return Engagement::NotClicked;
  if (!has_seconds)
    throw ValidationError("clicked exposure lacks education_seconds; engagement split undefined");
  if (seconds <= rule.disengaged_max || seconds >= rule.timeout)
    return Engagement::Disengaged;
  if (seconds >= rule.engaged_min && seconds <= rule.engaged_max)
    return Engagement::Engaged;
  return Engagement::Buffer;
}

}  // namespace phishpanel
