#include "phishpanel/scenario.hpp"

#include <ostream>

#include "phishpanel/errors.hpp"

namespace phishpanel {

namespace {

CatalogEntry entry(int campaign, int scenario, const char* date,
                   std::array<int, 5> cues, std::array<int, 2> format,
                   std::array<int, 5> education) {
  CatalogEntry e;
  e.campaign = campaign;
  e.start_date = date;
  e.code.scenario_id = scenario;
  e.code.cues = cues;
  e.code.format = format;
  e.code.education = education;
  return e;
}

int parse_indicator(const std::string& value, const std::string& column,
                    std::size_t line_no) {
  if (value == "0") return 0;
  if (value == "1") return 1;
  throw ParseError("line " + std::to_string(line_no) + ": column '" + column +
                   "' must be 0 or 1, got '" + value + "'");
}

}  // namespace

const std::vector<CatalogEntry>& default_catalog() {
  static const std::vector<CatalogEntry> catalog = {
      //    camp scen date          A  U  F  C  I     T  L     AE AL RP EH TH
      entry(1, 28, "2016-06-07", {0, 0, 1, 1, 0}, {1, 0}, {0, 0, 0, 0, 0}),
      entry(2, 29, "2016-07-11", {0, 0, 1, 1, 0}, {1, 0}, {0, 0, 0, 0, 0}),
      entry(3, 30, "2016-08-02", {1, 1, 0, 0, 1}, {0, 0}, {1, 0, 0, 0, 0}),
      entry(4, 32, "2016-08-17", {1, 1, 0, 0, 1}, {0, 0}, {1, 0, 0, 0, 0}),
      entry(5, 33, "2016-11-15", {1, 1, 0, 0, 1}, {0, 0}, {0, 1, 0, 0, 0}),
      entry(6, 39, "2017-08-01", {0, 0, 1, 1, 0}, {1, 0}, {1, 0, 0, 0, 0}),
      entry(7, 47, "2018-02-14", {1, 1, 1, 0, 0}, {0, 0}, {1, 0, 0, 0, 1}),
      entry(8, 48, "2018-03-15", {0, 1, 0, 1, 0}, {0, 0}, {1, 0, 0, 0, 0}),
      entry(9, 52, "2018-06-12", {1, 1, 0, 1, 0}, {0, 0}, {1, 0, 1, 0, 0}),
      entry(10, 56, "2018-11-13", {1, 1, 0, 1, 1}, {0, 0}, {1, 1, 0, 1, 0}),
      entry(11, 59, "2019-01-30", {1, 0, 1, 0, 1}, {0, 0}, {1, 0, 1, 0, 0}),
      entry(12, 61, "2019-05-15", {0, 0, 1, 1, 0}, {1, 0}, {1, 0, 1, 0, 0}),
      entry(13, 63, "2019-06-12", {0, 0, 0, 1, 1}, {0, 1}, {1, 0, 1, 1, 0}),
      entry(14, 65, "2019-07-24", {1, 0, 0, 1, 1}, {0, 0}, {1, 1, 0, 1, 0}),
      entry(15, 67, "2019-10-02", {1, 1, 0, 1, 1}, {0, 0}, {1, 0, 1, 1, 0}),
      entry(16, 69, "2019-12-11", {0, 0, 1, 1, 0}, {1, 0}, {1, 0, 1, 1, 0}),
      entry(17, 71, "2020-02-11", {0, 1, 0, 1, 1}, {0, 0}, {1, 0, 1, 1, 0}),
  };
  return catalog;
}

std::vector<ScenarioCode> parse_scenario_codes(const CsvTable& table) {
  int id_col = table.require_column("scenario_id");
  std::array<int, 5> cue_cols, edu_cols;
  std::array<int, 2> fmt_cols;
  for (std::size_t i = 0; i < kCueNames.size(); ++i)
    cue_cols[i] = table.require_column(kCueNames[i]);
  for (std::size_t i = 0; i < kFormatNames.size(); ++i)
    fmt_cols[i] = table.require_column(kFormatNames[i]);
  for (std::size_t i = 0; i < kEducationNames.size(); ++i)
    edu_cols[i] = table.require_column(kEducationNames[i]);

  std::vector<ScenarioCode> codes;
  codes.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::size_t line_no = table.line_numbers[r];
    ScenarioCode code;
    try {
      code.scenario_id = std::stoi(row[id_col]);
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": scenario_id must be an integer, got '" + row[id_col] + "'");
    }
    for (std::size_t i = 0; i < 5; ++i)
      code.cues[i] = parse_indicator(row[cue_cols[i]], kCueNames[i], line_no);
    for (std::size_t i = 0; i < 2; ++i)
      code.format[i] = parse_indicator(row[fmt_cols[i]], kFormatNames[i], line_no);
    for (std::size_t i = 0; i < 5; ++i)
      code.education[i] = parse_indicator(row[edu_cols[i]], kEducationNames[i], line_no);
    for (const auto& existing : codes)
      if (existing.scenario_id == code.scenario_id)
        throw ParseError("line " + std::to_string(line_no) +
                         ": duplicate scenario_id " + std::to_string(code.scenario_id));
    codes.push_back(code);
  }
  return codes;
}

std::vector<ScenarioCode> read_scenario_codes(const std::string& path) {
  return parse_scenario_codes(read_csv_file(path));
}

void write_scenario_codes(std::ostream& out, const std::vector<ScenarioCode>& codes) {
  std::vector<std::string> header = {"scenario_id"};
  for (const auto& n : kCueNames) header.push_back(n);
  for (const auto& n : kFormatNames) header.push_back(n);
  for (const auto& n : kEducationNames) header.push_back(n);
  write_csv_row(out, header);
  for (const auto& code : codes) {
    std::vector<std::string> row = {std::to_string(code.scenario_id)};
    for (int v : code.cues) row.push_back(std::to_string(v));
    for (int v : code.format) row.push_back(std::to_string(v));
    for (int v : code.education) row.push_back(std::to_string(v));
    write_csv_row(out, row);
  }
}

const ScenarioCode* find_scenario(const std::vector<ScenarioCode>& codes,
                                  int scenario_id) {
  for (const auto& code : codes)
    if (code.scenario_id == scenario_id) return &code;
  return nullptr;
}

}  // namespace phishpanel
