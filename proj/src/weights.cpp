#include "phishpanel/weights.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "phishpanel/errors.hpp"

namespace phishpanel {

namespace {

// Column layout shared by the two designs; the denominator appends the
// time-varying history block after the numerator columns.
DesignMatrix exposure_design(const PanelDataset& panel, const BaselineEncoding& baselines,
                             const CampaignEncoding& campaigns, bool with_history) {
  const auto n = static_cast<Eigen::Index>(panel.exposures.size());
  std::vector<std::string> names;
  names.emplace_back("intercept");
  names.emplace_back("lag_click");
  names.emplace_back("first_exposure");
  baselines.append_names(names);
  campaigns.append_names(names);
  if (with_history) {
    names.emplace_back("lag_report");
    names.emplace_back("cum_clicks");
    names.emplace_back("cum_reports");
    names.emplace_back("exposure_order");
    names.emplace_back("gap_days");
  }
  const auto k = static_cast<Eigen::Index>(names.size());

  DesignMatrix design;
  design.names = std::move(names);
  design.X.resize(n, k);
  design.w = Eigen::VectorXd::Ones(n);
  design.cluster.resize(panel.exposures.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Exposure& e = panel.exposures[static_cast<std::size_t>(i)];
    Eigen::Index c = 0;
    design.X(i, c++) = 1.0;
    design.X(i, c++) = e.lag_click;
    design.X(i, c++) = e.first_exposure;
    std::vector<double> buf(static_cast<std::size_t>(baselines.width()));
    baselines.fill(panel.employees[static_cast<std::size_t>(e.employee)].baseline, buf.data());
    for (double v : buf) design.X(i, c++) = v;
    buf.assign(static_cast<std::size_t>(campaigns.width()), 0.0);
    campaigns.fill(e.campaign_id, buf.data());
    for (double v : buf) design.X(i, c++) = v;
    if (with_history) {
      design.X(i, c++) = e.lag_report;
      design.X(i, c++) = e.cum_clicks;
      design.X(i, c++) = e.cum_reports;
      design.X(i, c++) = e.order;
      design.X(i, c++) = e.gap_days;
    }
    design.cluster[static_cast<std::size_t>(i)] = e.employee;
  }
  return design;
}

Eigen::VectorXd clicked_vector(const PanelDataset& panel) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(panel.exposures.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i)
    y[i] = panel.exposures[static_cast<std::size_t>(i)].clicked;
  return y;
}

// Drops redundant generated columns before fitting. Columns are scanned in
// design order, so redundancy is always resolved against the appended
// history block rather than the core terms: a history column that repeats
// something already in the numerator set is the one that goes. On a panel
// where every history column is redundant the two treatment designs end up
// identical, which is what makes their probability ratio exactly one.
std::pair<FitResult, DesignMatrix> fit_pruned(DesignMatrix design, const Eigen::VectorXd& y,
                                              const FitOptions& options) {
  const Eigen::Index n = design.X.rows();
  const Eigen::Index k = design.X.cols();
  std::vector<Eigen::Index> keep;
  Eigen::MatrixXd basis(n, k);
  Eigen::Index r = 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::VectorXd v = design.X.col(j);
    double scale = v.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index b = 0; b < r; ++b) v -= basis.col(b).dot(v) * basis.col(b);
    if (v.norm() <= 1e-8 * std::max(1.0, scale)) continue;
    basis.col(r) = v / v.norm();
    ++r;
    keep.push_back(j);
  }
  if (static_cast<std::size_t>(r) < design.names.size()) {
    std::vector<std::string> names;
    Eigen::MatrixXd X(n, r);
    for (Eigen::Index c = 0; c < r; ++c) {
      X.col(c) = design.X.col(keep[static_cast<std::size_t>(c)]);
      names.push_back(design.names[static_cast<std::size_t>(keep[static_cast<std::size_t>(c)])]);
    }
    design.X = std::move(X);
    design.names = std::move(names);
  }
  FitResult fit = fit_glm(design, y, Link::Logit, options);
  return {std::move(fit), std::move(design)};
}

// Probability the model assigns to the arm actually observed.
std::vector<double> observed_arm_probabilities(const DesignMatrix& design,
                                               const Eigen::VectorXd& y, const FitResult& fit) {
  Eigen::VectorXd eta = design.X * fit.beta;
  std::vector<double> p(static_cast<std::size_t>(eta.size()));
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    double p1 = link_cdf(fit.link, eta[i]);
    p[static_cast<std::size_t>(i)] = y[i] > 0.5 ? p1 : 1.0 - p1;
  }
  return p;
}

WeightSummary summarize(const std::vector<double>& values, PercentileRule rule) {
  WeightSummary s;
  s.mean = mean(values);
  s.sd = sample_sd(values);
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  s.p1 = percentile(values, 1.0, rule);
  s.p5 = percentile(values, 5.0, rule);
  s.p50 = percentile(values, 50.0, rule);
  s.p95 = percentile(values, 95.0, rule);
  s.p99 = percentile(values, 99.0, rule);
  return s;
}

}  // namespace

DesignMatrix numerator_design(const PanelDataset& panel, const BaselineEncoding& baselines,
                              const CampaignEncoding& campaigns) {
  return exposure_design(panel, baselines, campaigns, false);
}

DesignMatrix denominator_design(const PanelDataset& panel, const BaselineEncoding& baselines,
                                const CampaignEncoding& campaigns) {
  return exposure_design(panel, baselines, campaigns, true);
}

TreatmentModels fit_treatment_models(const PanelDataset& panel, const WeightOptions& options) {
  if (panel.exposures.empty()) throw ValidationError("cannot fit treatment models on an empty panel");
  BaselineEncoding baselines = make_baseline_encoding(panel);
  CampaignEncoding campaigns = campaign_encoding_exposures(panel);
  Eigen::VectorXd y = clicked_vector(panel);
  TreatmentModels models;
  models.numerator = fit_pruned(numerator_design(panel, baselines, campaigns), y, options.fit).first;
  models.denominator =
      fit_pruned(denominator_design(panel, baselines, campaigns), y, options.fit).first;
  return models;
}

WeightSet stabilized_weights(const PanelDataset& panel, const WeightOptions& options) {
  if (panel.exposures.empty()) throw ValidationError("cannot fit treatment models on an empty panel");
  WeightSet ws;
  ws.percentile_rule = options.percentile_rule;

  BaselineEncoding baselines = make_baseline_encoding(panel);
  CampaignEncoding campaigns = campaign_encoding_exposures(panel);
  Eigen::VectorXd y = clicked_vector(panel);
  auto [num_fit, num_design] = fit_pruned(numerator_design(panel, baselines, campaigns), y, options.fit);
  auto [den_fit, den_design] =
      fit_pruned(denominator_design(panel, baselines, campaigns), y, options.fit);
  ws.models.numerator = std::move(num_fit);
  ws.models.denominator = std::move(den_fit);
  ws.p_numerator = observed_arm_probabilities(num_design, y, ws.models.numerator);
  ws.p_denominator = observed_arm_probabilities(den_design, y, ws.models.denominator);

  const std::size_t n = panel.exposures.size();
  ws.sw.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Exposure& e = panel.exposures[i];
    double pd = ws.p_denominator[i];
    if (pd < options.positivity_floor) {
      const Employee& emp = panel.employees[static_cast<std::size_t>(e.employee)];
      throw PositivityError(
          "treatment probability " + std::to_string(pd) + " below positivity floor " +
          std::to_string(options.positivity_floor) + " for employee " + emp.id + ", campaign " +
          std::to_string(e.campaign_id) +
          "; the denominator model assigns this observed arm essentially zero probability");
    }
    double ratio = ws.p_numerator[i] / pd;
    ws.sw[i] = e.first_exposure ? ratio : ws.sw[i - 1] * ratio;
  }
  ws.sw_trimmed = ws.sw;
  return ws;
}

WeightSet trim_weights(const WeightSet& weights, double lower_percentile, double upper_percentile) {
  if (!(lower_percentile >= 0.0 && upper_percentile <= 100.0 && lower_percentile < upper_percentile))
    throw ValidationError("trim percentiles must satisfy 0 <= lower < upper <= 100");
  if (weights.sw.empty()) throw ValidationError("cannot trim an empty weight set");
  WeightSet out = weights;
  out.lower_percentile = lower_percentile;
  out.upper_percentile = upper_percentile;
  // Cutoffs always come from the raw weights, so re-trimming at the same
  // percentiles is a no-op.
  out.lower_cutoff = percentile(weights.sw, lower_percentile, weights.percentile_rule);
  out.upper_cutoff = percentile(weights.sw, upper_percentile, weights.percentile_rule);
  out.capped_low = 0;
  out.capped_high = 0;
  out.sw_trimmed.resize(weights.sw.size());
  for (std::size_t i = 0; i < weights.sw.size(); ++i) {
    double w = weights.sw[i];
    if (w < out.lower_cutoff) {
      out.sw_trimmed[i] = out.lower_cutoff;
      ++out.capped_low;
    } else if (w > out.upper_cutoff) {
      out.sw_trimmed[i] = out.upper_cutoff;
      ++out.capped_high;
    } else {
      out.sw_trimmed[i] = w;
    }
  }
  return out;
}

WeightDiagnostics weight_diagnostics(const WeightSet& weights, int histogram_bins) {
  if (weights.sw.empty()) throw ValidationError("cannot summarize an empty weight set");
  WeightDiagnostics d;
  d.n = static_cast<long long>(weights.sw.size());
  d.raw = summarize(weights.sw, weights.percentile_rule);
  d.trimmed = summarize(weights.sw_trimmed, weights.percentile_rule);
  d.capped_low = weights.capped_low;
  d.capped_high = weights.capped_high;
  d.lower_cutoff = weights.lower_cutoff;
  d.upper_cutoff = weights.upper_cutoff;
  d.raw_histogram = histogram(weights.sw, histogram_bins);
  d.trimmed_histogram = histogram(weights.sw_trimmed, histogram_bins);
  return d;
}

std::vector<double> transition_weights(const PanelDataset& panel,
                                       const std::vector<Transition>& transitions,
                                       const WeightSet& weights, bool use_trimmed) {
  if (weights.sw.size() != panel.exposures.size())
    throw ValidationError("weight set does not match the panel it is applied to");
  const std::vector<double>& sw = use_trimmed ? weights.sw_trimmed : weights.sw;
  std::vector<double> out(transitions.size());
  for (std::size_t i = 0; i < transitions.size(); ++i) out[i] = sw[transitions[i].exp_t];
  return out;
}

}  // namespace phishpanel
