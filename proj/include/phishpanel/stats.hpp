// Percentiles, summary moments, histograms, and chi-square tail
// probabilities used by the weight diagnostics and Wald tests.
#pragma once

#include <vector>

namespace phishpanel {

enum class PercentileRule {
  LinearInterpolation,  // inclusive linear interpolation between order statistics
  NearestRank,
};

// p in [0,100]. Works on an unsorted copy of the data.
double percentile(std::vector<double> values, double p,
                  PercentileRule rule = PercentileRule::LinearInterpolation);

double mean(const std::vector<double>& values);
double sample_sd(const std::vector<double>& values);

struct HistogramBin {
  double left, right;
  long long count;
};

std::vector<HistogramBin> histogram(const std::vector<double>& values, int bins);

// Upper-tail probability of a chi-square distribution with df degrees of
// freedom, via the regularized incomplete gamma function.
double chi2_sf(double x, int df);

}  // namespace phishpanel
