#include "phishpanel/margins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "phishpanel/errors.hpp"

namespace phishpanel {

namespace {

ApeEstimate evaluate_ape(const FitResult& fit, const DesignMatrix& design,
                         const TreatmentLayout& layout,
                         const std::optional<double>& pin_value, bool use_weights) {
  const Eigen::MatrixXd& X = design.X;
  Eigen::Index n = X.rows();
  int k = static_cast<int>(X.cols());

  double sum_w = 0.0, sum_effect = 0.0;
  Eigen::VectorXd jac = Eigen::VectorXd::Zero(k);
  Eigen::RowVectorXd x0(k), x1(k);

  for (Eigen::Index i = 0; i < n; ++i) {
    double w = use_weights ? design.w(i) : 1.0;
    if (w <= 0.0) continue;
    x0 = X.row(i);
    x1 = X.row(i);
    if (pin_value) {
      int mc = layout.interactions.front().moderator_column;
      x0(mc) = *pin_value;
      x1(mc) = *pin_value;
    }
    x0(layout.treatment_column) = 0.0;
    x1(layout.treatment_column) = 1.0;
    for (std::size_t t = 0; t < layout.interactions.size(); ++t) {
      const auto& inter = layout.interactions[t];
      double mod = (pin_value && t == 0) ? *pin_value : X(i, inter.moderator_column);
      x0(inter.column) = 0.0;
      x1(inter.column) = mod;
    }
    for (int z : layout.zero_columns) {
      x0(z) = 0.0;
      x1(z) = 0.0;
    }
    double eta0 = x0 * fit.beta;
    double eta1 = x1 * fit.beta;
    sum_effect += w * (link_cdf(fit.link, eta1) - link_cdf(fit.link, eta0));
    jac += w * (link_pdf(fit.link, eta1) * x1 - link_pdf(fit.link, eta0) * x0).transpose();
    sum_w += w;
  }
  if (sum_w <= 0.0) throw ValidationError("no positive-weight rows for the APE average");

  ApeEstimate out;
  out.estimate = sum_effect / sum_w;
  jac /= sum_w;
  double var = jac.dot(fit.vcov * jac);
  out.se = var > 0.0 ? std::sqrt(var) : 0.0;
  out.moderator_value = pin_value;
  return out;
}

}  // namespace

ApeBlock average_partial_effects(const FitResult& fit, const DesignMatrix& design,
                                 const TreatmentLayout& layout,
                                 const std::vector<double>& moderator_grid,
                                 bool use_weights) {
  int k = static_cast<int>(design.X.cols());
  if (layout.treatment_column < 0 || layout.treatment_column >= k)
    throw ValidationError("treatment column out of range");
  if (fit.beta.size() != k)
    throw ValidationError("fit and design have different column counts");
  for (const auto& inter : layout.interactions)
    if (inter.column < 0 || inter.column >= k || inter.moderator_column < 0 ||
        inter.moderator_column >= k)
      throw ValidationError("interaction column out of range");
  if (!moderator_grid.empty() && layout.interactions.empty())
    throw ValidationError("a moderator grid requires an interaction term");

  ApeBlock block;
  block.weighted_average = use_weights;
  block.overall = evaluate_ape(fit, design, layout, std::nullopt, use_weights);

  if (!moderator_grid.empty()) {
    int mc = layout.interactions.front().moderator_column;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Eigen::Index i = 0; i < design.X.rows(); ++i) {
      if (design.w(i) <= 0.0) continue;
      lo = std::min(lo, design.X(i, mc));
      hi = std::max(hi, design.X(i, mc));
    }
    for (double value : moderator_grid) {
      ApeEstimate e = evaluate_ape(fit, design, layout, value, use_weights);
      e.outside_support = (value < lo || value > hi);
      block.grid.push_back(e);
    }
  }
  return block;
}

}  // namespace phishpanel
