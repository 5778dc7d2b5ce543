// Stabilized inverse-probability-of-treatment weights for click-triggered
// exposure, with percentile trimming and distribution diagnostics.
//
// Both treatment models are pooled logits fit at the exposure level. The
// numerator conditions on baseline covariates, campaign indicators, and the
// employee's own click history; the denominator adds the time-varying
// history (prior reporting, cumulative counts, exposure order, gap days).
// Weights multiply per employee across exposures in time order.
#pragma once

#include <vector>

#include "phishpanel/encoding.hpp"
#include "phishpanel/glm.hpp"
#include "phishpanel/panel.hpp"
#include "phishpanel/stats.hpp"

namespace phishpanel {

struct WeightOptions {
  FitOptions fit;
  double positivity_floor = 1e-6;
  PercentileRule percentile_rule = PercentileRule::LinearInterpolation;
};

struct TreatmentModels {
  FitResult numerator;
  FitResult denominator;
};

// Exposure-level designs for the two treatment models, aligned with
// panel.exposures. Exposed so tests can probe them directly.
DesignMatrix numerator_design(const PanelDataset& panel, const BaselineEncoding& baselines,
                              const CampaignEncoding& campaigns);
DesignMatrix denominator_design(const PanelDataset& panel, const BaselineEncoding& baselines,
                                const CampaignEncoding& campaigns);

TreatmentModels fit_treatment_models(const PanelDataset& panel, const WeightOptions& options = {});

struct WeightSet {
  // All vectors are exposure-level, aligned with panel.exposures.
  std::vector<double> sw;         // raw stabilized weights (cumulative products)
  std::vector<double> sw_trimmed; // equal to sw until trim_weights is applied
  std::vector<double> p_numerator;    // model probability of the observed arm
  std::vector<double> p_denominator;
  TreatmentModels models;
  PercentileRule percentile_rule = PercentileRule::LinearInterpolation;
  // Trim state; percentiles are negative while untrimmed.
  double lower_percentile = -1.0, upper_percentile = -1.0;
  double lower_cutoff = 0.0, upper_cutoff = 0.0;
  long long capped_low = 0, capped_high = 0;

  bool trimmed() const { return lower_percentile >= 0.0; }
};

WeightSet stabilized_weights(const PanelDataset& panel, const WeightOptions& options = {});

// Caps sw at the [lower, upper] percentiles of the *raw* weight distribution
// and records how many observations hit each cutoff. Because cutoffs always
// come from the raw weights, trimming twice at the same percentiles changes
// nothing.
WeightSet trim_weights(const WeightSet& weights, double lower_percentile, double upper_percentile);

struct WeightSummary {
  double mean = 0.0, sd = 0.0;
  double min = 0.0, p1 = 0.0, p5 = 0.0, p50 = 0.0, p95 = 0.0, p99 = 0.0, max = 0.0;
};

struct WeightDiagnostics {
  long long n = 0;
  WeightSummary raw;
  WeightSummary trimmed;
  long long capped_low = 0, capped_high = 0;
  double lower_cutoff = 0.0, upper_cutoff = 0.0;
  std::vector<HistogramBin> raw_histogram;
  std::vector<HistogramBin> trimmed_histogram;
};

WeightDiagnostics weight_diagnostics(const WeightSet& weights, int histogram_bins = 40);

// Per-transition weights: each transition inherits the stabilized weight of
// its time-t exposure (the history up to and including the treatment arm
// being modeled).
std::vector<double> transition_weights(const PanelDataset& panel,
                                       const std::vector<Transition>& transitions,
                                       const WeightSet& weights, bool use_trimmed = true);

}  // namespace phishpanel
