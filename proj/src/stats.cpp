#include "phishpanel/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "phishpanel/errors.hpp"

namespace phishpanel {

double percentile(std::vector<double> values, double p, PercentileRule rule) {
  if (values.empty()) throw ValidationError("percentile of empty data");
  if (p < 0.0 || p > 100.0) throw ValidationError("percentile must be in [0,100]");
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (rule == PercentileRule::NearestRank) {
    if (p == 0.0) return values.front();
    std::size_t rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    if (rank < 1) rank = 1;
    if (rank > n) rank = n;
    return values[rank - 1];
  }
  double h = (static_cast<double>(n) - 1.0) * p / 100.0;
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= n) return values[n - 1];
  double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double mean(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("mean of empty data");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double sample_sd(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / (static_cast<double>(values.size()) - 1.0));
}

std::vector<HistogramBin> histogram(const std::vector<double>& values, int bins) {
  if (values.empty()) throw ValidationError("histogram of empty data");
  if (bins < 1) throw ValidationError("histogram needs at least one bin");
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (hi == lo) hi = lo + 1.0;
  double width = (hi - lo) / bins;
  std::vector<HistogramBin> out(bins);
  for (int b = 0; b < bins; ++b)
    out[b] = {lo + b * width, lo + (b + 1) * width, 0};
  for (double v : values) {
    int b = static_cast<int>((v - lo) / width);
    if (b < 0) b = 0;
    if (b >= bins) b = bins - 1;  // right edge lands in the last bin
    ++out[b].count;
  }
  return out;
}

namespace {

// Regularized incomplete gamma, series and continued-fraction branches.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double chi2_sf(double x, int df) {
  if (df < 1) throw ValidationError("chi2_sf needs df >= 1");
  if (x <= 0.0) return 1.0;
  double a = 0.5 * df, xx = 0.5 * x;
  if (xx < a + 1.0) return 1.0 - gamma_p_series(a, xx);
  return gamma_q_contfrac(a, xx);
}

}  // namespace phishpanel
