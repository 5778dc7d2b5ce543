#include "phishpanel/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "phishpanel/errors.hpp"
#include "phishpanel/rng.hpp"
#include "phishpanel/similarity.hpp"
#include "phishpanel/stats.hpp"

namespace phishpanel {

namespace {

constexpr double kLogTenureMean = 7.0;
constexpr double kLogTenureSd = 0.9;
constexpr double kTenureMissingProb = 0.03;

const std::vector<std::string> kRoles = {"admin", "engineering", "finance", "operations", "sales"};
const std::vector<std::string> kOrgUnits = {"field", "hq", "plant_1", "plant_2"};

struct SimExposure {
  int campaign_index = 0;  // 0-based
  int scenario_id = 0;
  int sent_day = 0;
  int click = 0, report = 0;
  double seconds = 0.0;
  bool has_seconds = false;
  // State entering this exposure, before its own outcomes.
  int lag_click = 0, lag_report = 0, cum_before = 0;
  double sim_prev = 0.0;  // cue similarity with the previous exposure's scenario
  double fixed_eta = 0.0; // intercept + campaign + scenario + tenure loadings
};

struct SimEmployee {
  double alpha = 0.0;
  std::string role, job_status, org_unit;
  double tenure_days = 0.0;
  bool tenure_missing = false;
  double tenure_z = 0.0;
  std::vector<SimExposure> exposures;
};

struct SimPanel {
  std::vector<SimEmployee> employees;
  std::vector<const CatalogEntry*> entries;  // per campaign
  std::vector<int> campaign_days;
  std::vector<double> campaign_effects;
};

double scenario_eta(const DgpConfig& config, const ScenarioCode& code) {
  double eta = 0.0;
  for (int j = 0; j < 5; ++j) eta += config.cue_loadings[static_cast<std::size_t>(j)] * code.cues[j];
  for (int j = 0; j < 2; ++j)
    eta += config.format_loadings[static_cast<std::size_t>(j)] * code.format[j];
  for (int j = 0; j < 5; ++j)
    eta += config.education_loadings[static_cast<std::size_t>(j)] * code.education[j];
  return eta;
}

double click_eta(const DgpConfig& config, const SimExposure& e, double alpha) {
  return e.fixed_eta + alpha + config.state_dependence * e.lag_click +
         config.feedback_loading * e.cum_before +
         config.similarity_interaction * e.lag_click * e.sim_prev +
         config.report_to_click * e.lag_report;
}

double report_eta(const DgpConfig& config, int click_now, int lag_report, int lag_click,
                  double alpha) {
  return config.report_intercept + config.report_click_loading * click_now +
         config.report_state_dependence * lag_report + config.report_lag_click * lag_click +
         config.report_heterogeneity_loading * alpha;
}

double draw_seconds(const DgpConfig& config, RngStream& rng) {
  const EngagementMix& mix = config.engagement;
  double total = mix.short_leave + mix.timeout + mix.engaged + mix.buffer;
  double u = rng.next_uniform() * total;
  double v = rng.next_uniform();
  double seconds;
  if (u < mix.short_leave) {
    seconds = 1.0 + 9.0 * v;
  } else if (u < mix.short_leave + mix.timeout) {
    seconds = 300.0 + 300.0 * v;
  } else if (u < mix.short_leave + mix.timeout + mix.engaged) {
    seconds = 20.0 + 270.0 * v;
  } else if (v < 0.5) {
    seconds = 10.5 + 9.0 * (2.0 * v);
  } else {
    seconds = 290.5 + 9.0 * (2.0 * (v - 0.5));
  }
  // Stored with one decimal; round here so the recorded value is the one
  // the engagement rule classifies.
  return std::round(seconds * 10.0) / 10.0;
}

SimPanel simulate_internal(const DgpConfig& config) {
  config.validate();
  SimPanel panel;
  const int T = config.n_campaigns;
  const auto catalog_size = config.catalog.size();

  panel.entries.resize(static_cast<std::size_t>(T));
  panel.campaign_days.resize(static_cast<std::size_t>(T));
  for (int c = 0; c < T; ++c) {
    const CatalogEntry& entry = config.catalog[static_cast<std::size_t>(c) % catalog_size];
    panel.entries[static_cast<std::size_t>(c)] = &entry;
    if (static_cast<std::size_t>(c) < catalog_size) {
      panel.campaign_days[static_cast<std::size_t>(c)] = iso_to_days(entry.start_date);
    } else {
      panel.campaign_days[static_cast<std::size_t>(c)] =
          panel.campaign_days[static_cast<std::size_t>(c) - 1] + 60;
    }
  }

  // Campaign effects sum to zero so the panel-level click rate does not
  // drift with the particular draw; only the between-campaign spread varies.
  RngStream campaign_rng(config.seed, 0);
  panel.campaign_effects.resize(static_cast<std::size_t>(T));
  double effect_total = 0.0;
  for (int c = 0; c < T; ++c) {
    double draw = config.campaign_sd * campaign_rng.next_normal();
    panel.campaign_effects[static_cast<std::size_t>(c)] = draw;
    effect_total += draw;
  }
  if (T > 0)
    for (double& e : panel.campaign_effects) e -= effect_total / T;

  panel.employees.resize(static_cast<std::size_t>(config.n_employees));
  for (int i = 0; i < config.n_employees; ++i) {
    RngStream rng(config.seed, static_cast<std::uint64_t>(i) + 1);
    SimEmployee& emp = panel.employees[static_cast<std::size_t>(i)];

    double alpha_noise = rng.next_normal();
    emp.role = kRoles[static_cast<std::size_t>(rng.next_below(kRoles.size()))];
    double uj = rng.next_uniform();
    emp.job_status = uj < 0.75 ? "full_time" : (uj < 0.92 ? "part_time" : "contractor");
    emp.org_unit = kOrgUnits[static_cast<std::size_t>(rng.next_below(kOrgUnits.size()))];
    bool tenure_missing = rng.next_uniform() < kTenureMissingProb;
    double log_tenure = kLogTenureMean + kLogTenureSd * rng.next_normal();
    emp.tenure_missing = tenure_missing;
    if (!tenure_missing) {
      emp.tenure_days = std::clamp(std::round(std::exp(log_tenure)), 30.0, 15000.0);
      emp.tenure_z = (std::log(emp.tenure_days) - kLogTenureMean) / kLogTenureSd;
    }

    std::vector<char> attends(static_cast<std::size_t>(T));
    bool any = false;
    for (int c = 0; c < T; ++c) {
      attends[static_cast<std::size_t>(c)] = rng.next_uniform() >= config.skip_prob;
      any = any || attends[static_cast<std::size_t>(c)];
    }
    if (!any) attends[0] = 1;
    std::vector<int> jitter(static_cast<std::size_t>(T));
    for (int c = 0; c < T; ++c) jitter[static_cast<std::size_t>(c)] = rng.next_below(5);

    // Heterogeneity splits into an attendance-loaded part (standardized
    // against the binomial attendance moments) and an idiosyncratic part.
    double share = config.heterogeneity_attendance_share;
    double z_att = 0.0;
    if (share > 0.0) {
      int n_att = 0;
      for (char a : attends) n_att += a;
      double sd_att = std::sqrt(T * config.skip_prob * (1.0 - config.skip_prob));
      z_att = (n_att - T * (1.0 - config.skip_prob)) / sd_att;
    }
    emp.alpha = config.heterogeneity_sd *
                (std::sqrt(share) * z_att + std::sqrt(1.0 - share) * alpha_noise);

    int lag_click = 0, lag_report = 0, cum_before = 0;
    if (config.burn_in) {
      // Orientation exposure before the first campaign: no cue overlap with
      // anything, so the similarity channel stays closed at entry.
      double eta_b = config.click_intercept + emp.alpha + config.tenure_loading * emp.tenure_z;
      int click_b = rng.next_uniform() < link_cdf(config.link, eta_b) ? 1 : 0;
      double eta_rb = report_eta(config, click_b, 0, 0, emp.alpha);
      int report_b = rng.next_uniform() < link_cdf(config.link, eta_rb) ? 1 : 0;
      lag_click = click_b;
      lag_report = report_b;
      cum_before = click_b;
    }

    const ScenarioCode* prev_code = nullptr;
    for (int c = 0; c < T; ++c) {
      if (!attends[static_cast<std::size_t>(c)]) continue;
      const CatalogEntry& entry = *panel.entries[static_cast<std::size_t>(c)];
      SimExposure e;
      e.campaign_index = c;
      e.scenario_id = entry.code.scenario_id;
      e.sent_day = panel.campaign_days[static_cast<std::size_t>(c)] +
                   jitter[static_cast<std::size_t>(c)];
      e.lag_click = lag_click;
      e.lag_report = lag_report;
      e.cum_before = cum_before;
      e.sim_prev = prev_code ? jaccard(*prev_code, entry.code, FeatureLayer::Cues) : 0.0;
      e.fixed_eta = config.click_intercept +
                    panel.campaign_effects[static_cast<std::size_t>(c)] +
                    scenario_eta(config, entry.code) + config.tenure_loading * emp.tenure_z;

      e.click = rng.next_uniform() < link_cdf(config.link, click_eta(config, e, emp.alpha)) ? 1 : 0;
      double eta_r = report_eta(config, e.click, e.lag_report, e.lag_click, emp.alpha);
      e.report = rng.next_uniform() < link_cdf(config.link, eta_r) ? 1 : 0;
      if (e.click) {
        e.seconds = draw_seconds(config, rng);
        e.has_seconds = true;
      }

      lag_click = e.click;
      lag_report = e.report;
      cum_before += e.click;
      prev_code = &entry.code;
      emp.exposures.push_back(e);
    }
  }
  return panel;
}

std::string employee_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "emp_%06d", index + 1);
  return buf;
}

std::string format_seconds(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", seconds);
  return buf;
}

}  // namespace

void DgpConfig::validate() const {
  if (n_employees < 2) throw ValidationError("dgp requires at least 2 employees");
  if (n_campaigns < 3) throw ValidationError("dgp requires at least 3 campaigns");
  if (catalog.empty()) throw ValidationError("dgp requires a nonempty scenario catalog");
  if (!(skip_prob >= 0.0 && skip_prob < 1.0))
    throw ValidationError("skip probability must lie in [0, 1)");
  if (!(heterogeneity_attendance_share >= 0.0 && heterogeneity_attendance_share <= 1.0))
    throw ValidationError("heterogeneity attendance share must lie in [0, 1]");
  if (heterogeneity_attendance_share > 0.0 && skip_prob <= 0.0)
    throw ValidationError(
        "heterogeneity attendance share requires a positive skip probability");
  const double scales[] = {click_intercept,
                           heterogeneity_sd,
                           state_dependence,
                           feedback_loading,
                           similarity_interaction,
                           report_to_click,
                           campaign_sd,
                           tenure_loading,
                           report_intercept,
                           report_click_loading,
                           report_state_dependence,
                           report_lag_click,
                           report_heterogeneity_loading};
  for (double v : scales)
    if (!std::isfinite(v)) throw ValidationError("dgp parameters must be finite");
  double mix_total = engagement.short_leave + engagement.timeout + engagement.engaged +
                     engagement.buffer;
  if (!(engagement.short_leave >= 0.0 && engagement.timeout >= 0.0 && engagement.engaged >= 0.0 &&
        engagement.buffer >= 0.0 && mix_total > 0.0))
    throw ValidationError("engagement mix must be nonnegative with positive total");
}

DgpConfig dgp_preset(const std::string& name) {
  DgpConfig c;
  if (name == "paper-like" || name == "paper-like-full") {
    c.n_employees = name == "paper-like" ? 3000 : 19341;
    c.n_campaigns = name == "paper-like" ? 12 : 17;
    c.skip_prob = 0.15;
    c.click_intercept = -1.90;
    c.heterogeneity_sd = 0.60;
    c.heterogeneity_attendance_share = 0.97;
    c.state_dependence = 0.13;
    c.feedback_loading = 0.02;
    c.similarity_interaction = 0.40;
    c.report_to_click = -0.85;
    c.report_lag_click = 0.0;
    c.report_heterogeneity_loading = 0.0;
    c.report_state_dependence = -1.05;
    c.report_intercept = -1.05;
    c.report_click_loading = 0.70;
    c.campaign_sd = 0.15;
  } else if (name == "heterogeneity-only") {
    c.n_employees = 800;
    c.n_campaigns = 14;
    c.skip_prob = 0.10;
    c.click_intercept = -0.55;
    c.heterogeneity_sd = 1.0;
    c.heterogeneity_attendance_share = 0.99;
    c.state_dependence = 0.0;
    c.feedback_loading = 0.0;
    c.similarity_interaction = 0.0;
    c.report_to_click = 0.0;
    c.report_lag_click = 0.0;
    c.report_heterogeneity_loading = -0.20;
    c.report_state_dependence = 0.80;
  } else if (name == "exchangeable") {
    c.n_employees = 2000;
    c.n_campaigns = 10;
    c.skip_prob = 0.10;
    c.click_intercept = -1.20;
    c.heterogeneity_sd = 0.0;
    c.state_dependence = 0.0;
    c.feedback_loading = 0.0;
    c.similarity_interaction = 0.0;
    c.report_to_click = 0.0;
    c.report_lag_click = 0.0;
    c.report_heterogeneity_loading = 0.0;
    c.campaign_sd = 0.0;
    c.tenure_loading = 0.0;
  } else if (name == "short-panel") {
    c.n_employees = 2000;
    c.n_campaigns = 6;
    c.skip_prob = 0.05;
    c.click_intercept = -0.80;
    c.heterogeneity_sd = 1.15;
    c.state_dependence = 0.25;
    c.feedback_loading = 0.0;
    c.similarity_interaction = 0.0;
    c.report_to_click = 0.0;
    c.report_lag_click = 0.0;
    c.report_heterogeneity_loading = 0.0;
  } else {
    throw ValidationError("unknown dgp preset '" + name +
                          "'; available: paper-like, paper-like-full, "
                          "heterogeneity-only, exchangeable, short-panel");
  }
  return c;
}

std::vector<std::string> dgp_preset_names() {
  return {"paper-like", "paper-like-full",
          "heterogeneity-only", "exchangeable", "short-panel"};
}

std::vector<ScenarioCode> dgp_scenario_codes(const DgpConfig& config) {
  std::vector<ScenarioCode> codes;
  std::set<int> seen;
  for (const auto& entry : config.catalog)
    if (seen.insert(entry.code.scenario_id).second) codes.push_back(entry.code);
  return codes;
}

PanelDataset simulate_panel(const DgpConfig& config) {
  SimPanel sim = simulate_internal(config);

  CsvTable table;
  table.header = {"employee_id", "campaign_id",       "scenario_id", "sent_at",
                  "clicked",     "reported",          "education_seconds",
                  "role",        "job_status",        "org_unit",    "tenure_days"};
  for (int i = 0; i < config.n_employees; ++i) {
    const SimEmployee& emp = sim.employees[static_cast<std::size_t>(i)];
    std::string id = employee_id(i);
    for (const SimExposure& e : emp.exposures) {
      std::vector<std::string> row;
      row.push_back(id);
      row.push_back(std::to_string(e.campaign_index + 1));
      row.push_back(std::to_string(e.scenario_id));
      row.push_back(days_to_iso(e.sent_day));
      row.push_back(std::to_string(e.click));
      row.push_back(std::to_string(e.report));
      row.push_back(e.has_seconds ? format_seconds(e.seconds) : "");
      row.push_back(emp.role);
      row.push_back(emp.job_status);
      row.push_back(emp.org_unit);
      row.push_back(emp.tenure_missing
                        ? ""
                        : std::to_string(static_cast<long long>(emp.tenure_days)));
      table.rows.push_back(std::move(row));
      table.line_numbers.push_back(static_cast<long long>(table.rows.size()) + 1);
    }
  }
  return ingest_exposures(table);
}

DgpTruth oracle_ape(const DgpConfig& config, int replications,
                    const std::vector<double>& similarity_grid) {
  config.validate();
  if (replications < 1) throw ValidationError("oracle requires at least one replication");
  if (static_cast<long long>(replications) * config.n_employees < 10000)
    throw ValidationError(
        "oracle requires replications * employees >= 10,000 paths; got " +
        std::to_string(static_cast<long long>(replications) * config.n_employees));

  std::vector<double> click_means, report_means, safe_means;
  std::vector<std::vector<double>> grid_means(similarity_grid.size());
  long long total_transitions = 0;

  for (int rep = 0; rep < replications; ++rep) {
    DgpConfig rep_config = config;
    rep_config.seed = config.seed + static_cast<std::uint64_t>(rep);
    SimPanel sim = simulate_internal(rep_config);

    double click_sum = 0.0, report_sum = 0.0, safe_sum = 0.0;
    std::vector<double> grid_sum(similarity_grid.size(), 0.0);
    long long n = 0;

    for (const SimEmployee& emp : sim.employees) {
      for (std::size_t j = 0; j + 1 < emp.exposures.size(); ++j) {
        const SimExposure& cur = emp.exposures[j];
        const SimExposure& nxt = emp.exposures[j + 1];

        // Intermediate report at the treated exposure, under each arm.
        double p_rep_arm[2];
        for (int a = 0; a < 2; ++a)
          p_rep_arm[a] = link_cdf(
              config.link, report_eta(config, a, cur.lag_report, cur.lag_click, emp.alpha));

        auto next_click_prob = [&](int a, int r, double sim_value) {
          double eta = nxt.fixed_eta + emp.alpha + config.state_dependence * a +
                       config.feedback_loading * (cur.cum_before + a) +
                       config.similarity_interaction * a * sim_value +
                       config.report_to_click * r;
          return link_cdf(config.link, eta);
        };
        auto next_report_prob = [&](int click_next, int r, int a) {
          return link_cdf(config.link, report_eta(config, click_next, r, a, emp.alpha));
        };

        double p_click[2], p_report[2], p_safe[2];
        for (int a = 0; a < 2; ++a) {
          double pc = 0.0, pr = 0.0, ps = 0.0;
          for (int r = 0; r < 2; ++r) {
            double w = r == 1 ? p_rep_arm[a] : 1.0 - p_rep_arm[a];
            double pcn = next_click_prob(a, r, nxt.sim_prev);
            pc += w * pcn;
            pr += w * (pcn * next_report_prob(1, r, a) + (1.0 - pcn) * next_report_prob(0, r, a));
            ps += w * (1.0 - pcn) * next_report_prob(0, r, a);
          }
          p_click[a] = pc;
          p_report[a] = pr;
          p_safe[a] = ps;
        }
        click_sum += p_click[1] - p_click[0];
        report_sum += p_report[1] - p_report[0];
        safe_sum += p_safe[1] - p_safe[0];

        for (std::size_t g = 0; g < similarity_grid.size(); ++g) {
          double pc1 = 0.0, pc0 = 0.0;
          for (int r = 0; r < 2; ++r) {
            pc1 += (r == 1 ? p_rep_arm[1] : 1.0 - p_rep_arm[1]) *
                   next_click_prob(1, r, similarity_grid[g]);
            pc0 += (r == 1 ? p_rep_arm[0] : 1.0 - p_rep_arm[0]) *
                   next_click_prob(0, r, similarity_grid[g]);
          }
          grid_sum[g] += pc1 - pc0;
        }
        ++n;
      }
    }
    if (n == 0) throw ValidationError("oracle produced a panel with no transitions");
    total_transitions += n;
    click_means.push_back(click_sum / static_cast<double>(n));
    report_means.push_back(report_sum / static_cast<double>(n));
    safe_means.push_back(safe_sum / static_cast<double>(n));
    for (std::size_t g = 0; g < similarity_grid.size(); ++g)
      grid_means[g].push_back(grid_sum[g] / static_cast<double>(n));
  }

  auto summarize = [&](const std::vector<double>& means) {
    OracleApe o;
    o.estimate = mean(means);
    o.se = means.size() > 1 ? sample_sd(means) / std::sqrt(static_cast<double>(means.size()))
                            : 0.0;
    return o;
  };
  DgpTruth truth;
  truth.click = summarize(click_means);
  truth.report = summarize(report_means);
  truth.safe = summarize(safe_means);
  for (std::size_t g = 0; g < similarity_grid.size(); ++g)
    truth.click_by_similarity.emplace_back(similarity_grid[g], summarize(grid_means[g]));
  truth.replications = replications;
  truth.histories = total_transitions / replications;
  return truth;
}

}  // namespace phishpanel
