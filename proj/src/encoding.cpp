#include "phishpanel/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "phishpanel/errors.hpp"

namespace phishpanel {

namespace {

FactorEncoding make_factor(std::string prefix, std::set<std::string> seen) {
  FactorEncoding enc;
  enc.prefix = std::move(prefix);
  enc.levels.assign(seen.begin(), seen.end());
  return enc;
}

}  // namespace

void FactorEncoding::append_names(std::vector<std::string>& names) const {
  for (std::size_t i = 1; i < levels.size(); ++i) names.push_back(prefix + "_" + levels[i]);
}

void FactorEncoding::fill(const std::string& value, double* dst) const {
  for (int j = 0; j < width(); ++j) dst[j] = 0.0;
  auto it = std::lower_bound(levels.begin(), levels.end(), value);
  if (it == levels.end() || *it != value)
    throw ValidationError("unknown " + prefix + " level '" + value + "'");
  auto idx = static_cast<std::size_t>(it - levels.begin());
  if (idx > 0) dst[idx - 1] = 1.0;
}

int BaselineEncoding::width() const {
  return role.width() + job_status.width() + org_unit.width() + 2;  // tenure_z, tenure_missing
}

void BaselineEncoding::append_names(std::vector<std::string>& names) const {
  role.append_names(names);
  job_status.append_names(names);
  org_unit.append_names(names);
  names.push_back("tenure_z");
  names.push_back("tenure_missing");
}

void BaselineEncoding::fill(const EmployeeBaseline& baseline, double* dst) const {
  double* p = dst;
  role.fill(baseline.role, p);
  p += role.width();
  job_status.fill(baseline.job_status, p);
  p += job_status.width();
  org_unit.fill(baseline.org_unit, p);
  p += org_unit.width();
  if (baseline.tenure_missing) {
    p[0] = 0.0;
    p[1] = 1.0;
  } else {
    p[0] = (baseline.tenure_days - tenure_mean) / tenure_sd;
    p[1] = 0.0;
  }
}

BaselineEncoding make_baseline_encoding(const PanelDataset& panel) {
  std::set<std::string> roles, jobs, orgs;
  double sum = 0.0, sum2 = 0.0;
  long long n_tenure = 0;
  for (const auto& emp : panel.employees) {
    roles.insert(emp.baseline.role);
    jobs.insert(emp.baseline.job_status);
    orgs.insert(emp.baseline.org_unit);
    if (!emp.baseline.tenure_missing) {
      sum += emp.baseline.tenure_days;
      sum2 += emp.baseline.tenure_days * emp.baseline.tenure_days;
      ++n_tenure;
    }
  }
  BaselineEncoding enc;
  enc.role = make_factor("role", std::move(roles));
  enc.job_status = make_factor("job", std::move(jobs));
  enc.org_unit = make_factor("org", std::move(orgs));
  if (n_tenure > 0) {
    enc.tenure_mean = sum / static_cast<double>(n_tenure);
    double var = n_tenure > 1
                     ? (sum2 - sum * sum / static_cast<double>(n_tenure)) / static_cast<double>(n_tenure - 1)
                     : 0.0;
    enc.tenure_sd = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return enc;
}

void CampaignEncoding::append_names(std::vector<std::string>& names) const {
  for (std::size_t i = 1; i < campaigns.size(); ++i)
    names.push_back("camp_" + std::to_string(campaigns[i]));
}

void CampaignEncoding::fill(int campaign_id, double* dst) const {
  for (int j = 0; j < width(); ++j) dst[j] = 0.0;
  auto it = std::lower_bound(campaigns.begin(), campaigns.end(), campaign_id);
  if (it == campaigns.end() || *it != campaign_id)
    throw ValidationError("unknown campaign id " + std::to_string(campaign_id) +
                          " in design encoding");
  auto idx = static_cast<std::size_t>(it - campaigns.begin());
  if (idx > 0) dst[idx - 1] = 1.0;
}

CampaignEncoding campaign_encoding_exposures(const PanelDataset& panel) {
  std::set<int> ids;
  for (const auto& e : panel.exposures) ids.insert(e.campaign_id);
  CampaignEncoding enc;
  enc.campaigns.assign(ids.begin(), ids.end());
  return enc;
}

CampaignEncoding campaign_encoding_transitions(const std::vector<Transition>& transitions) {
  std::set<int> ids;
  for (const auto& t : transitions) ids.insert(t.campaign_next);
  CampaignEncoding enc;
  enc.campaigns.assign(ids.begin(), ids.end());
  return enc;
}

}  // namespace phishpanel
