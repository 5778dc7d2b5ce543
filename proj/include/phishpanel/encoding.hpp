// Shared design-column encodings: categorical baseline covariates as
// reference-coded dummies, standardized tenure with a missingness flag, and
// campaign indicator blocks. Used by both the treatment models and the
// outcome estimators so the two stages see identical covariate definitions.
#pragma once

#include <string>
#include <vector>

#include "phishpanel/panel.hpp"

namespace phishpanel {

struct FactorEncoding {
  std::string prefix;
  std::vector<std::string> levels;  // sorted; levels[0] is the reference

  // Number of dummy columns (levels minus reference; 0 for a single level).
  int width() const { return levels.empty() ? 0 : static_cast<int>(levels.size()) - 1; }
  void append_names(std::vector<std::string>& names) const;
  // Writes width() values into dst. Unknown levels throw.
  void fill(const std::string& value, double* dst) const;
};

struct BaselineEncoding {
  FactorEncoding role, job_status, org_unit;
  double tenure_mean = 0.0, tenure_sd = 1.0;

  int width() const;
  void append_names(std::vector<std::string>& names) const;
  void fill(const EmployeeBaseline& baseline, double* dst) const;
};

BaselineEncoding make_baseline_encoding(const PanelDataset& panel);

struct CampaignEncoding {
  std::vector<int> campaigns;  // sorted; campaigns[0] is the reference

  int width() const { return campaigns.empty() ? 0 : static_cast<int>(campaigns.size()) - 1; }
  void append_names(std::vector<std::string>& names) const;
  void fill(int campaign_id, double* dst) const;
};

// Campaign levels taken from all exposures (treatment models) or from the
// next-exposure campaigns of a transition set (outcome models).
CampaignEncoding campaign_encoding_exposures(const PanelDataset& panel);
CampaignEncoding campaign_encoding_transitions(const std::vector<Transition>& transitions);

}  // namespace phishpanel
