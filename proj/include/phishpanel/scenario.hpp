// Scenario-level binary feature codes: five email tactic cues, two email
// format indicators, five teachable-moment education features. Parsed from
// the scenario-code CSV or taken from the bundled default catalog the
// simulator uses.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "phishpanel/csv.hpp"

namespace phishpanel {

// Indicator order within each block, matching the CSV column order.
inline const std::array<std::string, 5> kCueNames = {"auth", "urg", "fin", "cur", "intr"};
inline const std::array<std::string, 2> kFormatNames = {"trans_template", "attach_lure"};
inline const std::array<std::string, 5> kEducationNames = {"ann_email", "ann_land",
                                                           "report_pitch", "emot_heur",
                                                           "scen_theme"};

struct ScenarioCode {
  int scenario_id = 0;
  std::array<int, 5> cues{};       // authority, urgency, financial, curiosity, internal
  std::array<int, 2> format{};     // transactional template, attachment lure
  std::array<int, 5> education{};  // annotated email, annotated landing, reporting
                                   // pitch, emotion/heuristic framing, theme
};

// One campaign in the bundled deployment sequence.
struct CatalogEntry {
  int campaign = 0;
  std::string start_date;  // ISO-8601
  ScenarioCode code;
};

// The 17-campaign catalog bundled as the simulator's default scenario
// sequence; also the fixture the similarity tests run on.
const std::vector<CatalogEntry>& default_catalog();

std::vector<ScenarioCode> parse_scenario_codes(const CsvTable& table);
std::vector<ScenarioCode> read_scenario_codes(const std::string& path);
void write_scenario_codes(std::ostream& out, const std::vector<ScenarioCode>& codes);

const ScenarioCode* find_scenario(const std::vector<ScenarioCode>& codes, int scenario_id);

}  // namespace phishpanel
