#include "phishpanel/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "phishpanel/errors.hpp"
#include "phishpanel/stats.hpp"

namespace phishpanel {

namespace {

struct LinkTerms {
  double loglik;
  Eigen::ArrayXd score;    // d loglik_i / d eta_i (per row, unweighted)
  Eigen::ArrayXd neg_h;    // -d2 loglik_i / d eta_i^2 (per row, unweighted), >= 0
  bool clamped = false;
};

// One pass over the linear predictor: log-likelihood plus per-row first and
// second derivative factors. Probit uses the inverse-Mills score and the
// observed Hessian factor lambda*(lambda+eta); logit uses y-p and p(1-p).
LinkTerms link_terms(const Eigen::ArrayXd& eta, const Eigen::ArrayXd& y,
                     const Eigen::ArrayXd& w, Link link, double probit_clamp) {
  LinkTerms t;
  std::size_t n = eta.size();
  t.score.resize(n);
  t.neg_h.resize(n);
  double ll = 0.0;
  if (link == Link::Probit) {
    for (std::size_t i = 0; i < n; ++i) {
      double e = eta[i];
      if (e > probit_clamp) {
        e = probit_clamp;
        if (w[i] > 0.0) t.clamped = true;
      } else if (e < -probit_clamp) {
        e = -probit_clamp;
        if (w[i] > 0.0) t.clamped = true;
      }
      double pdf = normal_pdf(e);
      double lam, ll_i;
      if (y[i] > 0.5) {
        lam = pdf / normal_cdf(e);
        ll_i = normal_log_cdf(e);
      } else {
        lam = -pdf / normal_cdf(-e);
        ll_i = normal_log_cdf(-e);
      }
      t.score[i] = lam;
      t.neg_h[i] = lam * (lam + e);
      ll += w[i] * ll_i;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double e = eta[i];
      double p = logistic_cdf(e);
      double ll_i = y[i] > 0.5 ? logistic_log_cdf(e) : logistic_log_cdf(-e);
      t.score[i] = y[i] - p;
      t.neg_h[i] = p * (1.0 - p);
      ll += w[i] * ll_i;
    }
  }
  t.loglik = ll;
  return t;
}

// Dense 0-based group index for arbitrary integer cluster labels, assigned
// in ascending label order so accumulation order is deterministic.
std::vector<int> dense_groups(const std::vector<int>& cluster, int& n_groups) {
  std::map<int, int> index;
  for (int label : cluster) index.emplace(label, 0);
  int g = 0;
  for (auto& [label, idx] : index) idx = g++;
  n_groups = g;
  std::vector<int> out(cluster.size());
  for (std::size_t i = 0; i < cluster.size(); ++i) out[i] = index[cluster[i]];
  return out;
}

double weighted_mean_y(const Eigen::ArrayXd& y, const Eigen::ArrayXd& w) {
  double sw = w.sum();
  return (w * y).sum() / sw;
}

struct Dependence {
  std::string message;
  std::vector<std::string> columns;
};

Dependence format_dependence(const Eigen::MatrixXd& S,
                             const std::vector<std::string>& names,
                             double rank_tol) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(S);
  qr.setThreshold(rank_tol);
  int rank = static_cast<int>(qr.rank());
  int k = static_cast<int>(S.cols());
  if (rank >= k) return {};
  const auto& perm = qr.colsPermutation().indices();
  Eigen::MatrixXd R = qr.matrixR();
  Dependence dep;
  std::ostringstream msg;
  msg << "design matrix is rank deficient (rank " << rank << " of " << k << "):";
  for (int j = rank; j < k; ++j) {
    int dep_col = perm(j);
    dep.columns.push_back(names[static_cast<std::size_t>(dep_col)]);
    // Express the dependent column in terms of the pivot columns.
    Eigen::VectorXd rhs = R.block(0, j, rank, 1);
    Eigen::VectorXd z = R.topLeftCorner(rank, rank)
                            .triangularView<Eigen::Upper>()
                            .solve(rhs);
    double zmax = z.cwiseAbs().maxCoeff();
    if (zmax <= rank_tol) {
      msg << " column '" << names[dep_col] << "' has no variation;";
      continue;
    }
    msg << " column '" << names[dep_col] << "' depends on {";
    bool first = true;
    for (int i = 0; i < rank; ++i) {
      if (std::fabs(z(i)) > 1e-6 * std::max(1.0, zmax)) {
        if (!first) msg << ", ";
        msg << "'" << names[perm(i)] << "'";
        first = false;
      }
    }
    msg << "};";
  }
  dep.message = msg.str();
  return dep;
}

}  // namespace

std::string link_name(Link link) {
  return link == Link::Probit ? "probit" : "logit";
}

int DesignMatrix::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

void DesignMatrix::validate() const {
  if (X.rows() == 0) throw ValidationError("empty design matrix");
  if (static_cast<int>(names.size()) != X.cols())
    throw ValidationError("design matrix needs one name per column");
  if (static_cast<Eigen::Index>(cluster.size()) != X.rows())
    throw ValidationError("design matrix needs one cluster label per row");
  if (w.size() != X.rows())
    throw ValidationError("design matrix needs one weight per row");
  if (!X.allFinite()) throw ValidationError("design matrix has non-finite entries");
  if ((w.array() < 0.0).any()) throw ValidationError("negative observation weight");
  if (w.maxCoeff() <= 0.0) throw ValidationError("all observation weights are zero");
}

void check_full_rank(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                     const Eigen::VectorXd& w, double rank_tol) {
  Eigen::MatrixXd S = w.array().sqrt().matrix().asDiagonal() * X;
  Dependence dep = format_dependence(S, names, rank_tol);
  if (!dep.message.empty()) throw CollinearityError(dep.message, std::move(dep.columns));
}

void check_separation(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                      const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  int n = static_cast<int>(X.rows());
  int k = static_cast<int>(X.cols());
  for (int j = 0; j < k; ++j) {
    double min1 = std::numeric_limits<double>::infinity(), max1 = -min1;
    double min0 = min1, max0 = -min1;
    bool any1 = false, any0 = false;
    for (int i = 0; i < n; ++i) {
      if (w(i) <= 0.0) continue;
      double v = X(i, j);
      if (y(i) > 0.5) {
        min1 = std::min(min1, v);
        max1 = std::max(max1, v);
        any1 = true;
      } else {
        min0 = std::min(min0, v);
        max0 = std::max(max0, v);
        any0 = true;
      }
    }
    if (!any1 || !any0) continue;  // handled by the constant-response check
    if (min1 == max1 && min0 == max0 && min1 == min0) continue;  // constant column
    if (min1 > max0 || max1 < min0)
      throw SeparationError("column '" + names[j] +
                            "' perfectly separates the response; no finite "
                            "estimate exists");
  }
}

std::pair<double, Eigen::VectorXd> loglik_and_gradient(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
    Link link, const Eigen::VectorXd& w, double probit_clamp) {
  if (!beta.allFinite()) throw ValidationError("non-finite coefficient vector");
  Eigen::ArrayXd eta = (X * beta).array();
  LinkTerms t = link_terms(eta, y.array(), w.array(), link, probit_clamp);
  Eigen::VectorXd grad = X.transpose() * (w.array() * t.score).matrix();
  return {t.loglik, grad};
}

FitResult fit_glm(const DesignMatrix& design, const Eigen::VectorXd& y, Link link,
                  const FitOptions& options) {
  design.validate();
  const Eigen::MatrixXd& X = design.X;
  if (y.size() != X.rows())
    throw ValidationError("response length does not match design matrix");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y(i) != 0.0 && y(i) != 1.0)
      throw ValidationError("response must be binary 0/1");

  check_full_rank(X, design.names, design.w, options.rank_tol);
  check_separation(X, design.names, y, design.w);

  Eigen::ArrayXd ya = y.array(), wa = design.w.array();
  double ybar = weighted_mean_y(ya, wa);
  if (ybar <= 0.0 || ybar >= 1.0)
    throw SeparationError("response has no weighted variation (mean " +
                          std::to_string(ybar) + ")");

  int k = design.k();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  // Start the intercept at the closed-form intercept-only MLE.
  for (int j = 0; j < k; ++j) {
    bool constant_one = true;
    for (Eigen::Index i = 0; i < X.rows() && constant_one; ++i)
      if (design.w(i) > 0.0 && X(i, j) != 1.0) constant_one = false;
    if (constant_one) {
      beta(j) = link_quantile(link, ybar);
      break;
    }
  }

  double clamp = options.probit_clamp;
  Eigen::ArrayXd eta = (X * beta).array();
  LinkTerms terms = link_terms(eta, ya, wa, link, clamp);

  FitResult result;
  result.model = link_name(link);
  result.link = link;
  result.names = design.names;
  result.n_obs = X.rows();

  bool converged = false, step_underflow = false;
  int iter = 0;
  double grad_norm = 0.0;
  for (; iter < options.max_iterations; ++iter) {
    Eigen::VectorXd grad = X.transpose() * (wa * terms.score).matrix();
    grad_norm = grad.lpNorm<Eigen::Infinity>();
    if (grad_norm < options.gradient_tol) {
      converged = true;
      break;
    }
    Eigen::MatrixXd negH =
        X.transpose() * (wa * terms.neg_h).matrix().asDiagonal() * X;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(negH);
    if (ldlt.info() != Eigen::Success)
      throw ValidationError("singular Hessian during Newton step; run "
                            "collinearity diagnostics");
    Eigen::VectorXd delta = ldlt.solve(grad);
    if (!delta.allFinite())
      throw ValidationError("non-finite Newton step; run collinearity diagnostics");

    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h) {
      Eigen::VectorXd cand = beta + step * delta;
      Eigen::ArrayXd eta_cand = (X * cand).array();
      LinkTerms cand_terms = link_terms(eta_cand, ya, wa, link, clamp);
      if (std::isfinite(cand_terms.loglik) && cand_terms.loglik > terms.loglik) {
        beta = cand;
        terms = cand_terms;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // The line search underflowed: no ascent direction at working
      // precision. Declare convergence at the current point.
      converged = true;
      step_underflow = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << link_name(link) << " fit did not converge after " << iter
        << " iterations (max-abs gradient " << grad_norm << ", loglik "
        << terms.loglik << ")";
    if (terms.clamped)
      msg << "; linear predictors hit the +/-" << clamp
          << " clamp, which suggests separation";
    throw ConvergenceError(msg.str());
  }

  {
    Eigen::VectorXd grad = X.transpose() * (wa * terms.score).matrix();
    result.gradient_norm = grad.lpNorm<Eigen::Infinity>();
  }
  result.beta = beta;
  result.iterations = iter;
  result.converged = true;
  result.step_underflow = step_underflow;
  result.clamped_at_optimum = terms.clamped;
  result.loglik = terms.loglik;

  double p0 = ybar;
  result.null_loglik =
      (wa * (ya * std::log(p0) + (1.0 - ya) * std::log1p(-p0))).sum();
  result.pseudo_r2 =
      result.null_loglik < 0.0 ? 1.0 - result.loglik / result.null_loglik : 0.0;

  result.vcov = cluster_sandwich(X, y, beta, link, design.w, design.cluster,
                                 options.cluster_correction, clamp);
  int n_groups = 0;
  dense_groups(design.cluster, n_groups);
  result.n_clusters = n_groups;
  return result;
}

Eigen::MatrixXd cluster_sandwich(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& beta, Link link,
                                 const Eigen::VectorXd& w,
                                 const std::vector<int>& cluster,
                                 bool small_sample_correction, double probit_clamp) {
  Eigen::ArrayXd eta = (X * beta).array();
  LinkTerms terms = link_terms(eta, y.array(), w.array(), link, probit_clamp);
  Eigen::ArrayXd ws = w.array() * terms.score;

  int n_groups = 0;
  std::vector<int> group = dense_groups(cluster, n_groups);
  int k = static_cast<int>(X.cols());
  Eigen::MatrixXd cluster_scores = Eigen::MatrixXd::Zero(k, n_groups);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    cluster_scores.col(group[i]) += ws(i) * X.row(i).transpose();
  Eigen::MatrixXd B = cluster_scores * cluster_scores.transpose();

  Eigen::MatrixXd negH =
      X.transpose() * (w.array() * terms.neg_h).matrix().asDiagonal() * X;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(negH);
  Eigen::ArrayXd D = ldlt.vectorD().array();
  if (ldlt.info() != Eigen::Success || D.minCoeff() <= 1e-14 * D.maxCoeff())
    throw ValidationError("singular Hessian in sandwich covariance; run "
                          "collinearity diagnostics");
  Eigen::MatrixXd V = ldlt.solve(ldlt.solve(B).transpose());
  if (small_sample_correction && n_groups > 1)
    V *= static_cast<double>(n_groups) / (n_groups - 1.0);
  return 0.5 * (V + V.transpose());
}

FitResult fe_lpm(const DesignMatrix& design, const Eigen::VectorXd& y,
                 const std::vector<int>& unit_ids, bool cluster_correction) {
  design.validate();
  if (y.size() != design.X.rows())
    throw ValidationError("response length does not match design matrix");
  if (unit_ids.size() != static_cast<std::size_t>(design.X.rows()))
    throw ValidationError("one unit id required per row");

  int n_units = 0;
  std::vector<int> unit = dense_groups(unit_ids, n_units);
  std::vector<double> unit_w(n_units, 0.0);
  std::vector<long long> unit_count(n_units, 0);
  for (Eigen::Index i = 0; i < design.X.rows(); ++i) {
    unit_w[unit[i]] += design.w(i);
    unit_count[unit[i]]++;
  }
  bool any_multi = false;
  for (long long c : unit_count)
    if (c >= 2) any_multi = true;
  if (!any_multi)
    throw ValidationError("all units have a single observation; nothing is "
                          "identified after within-demeaning");

  int k = design.k();
  Eigen::MatrixXd Xd = design.X;
  Eigen::VectorXd yd = y;
  // Weighted within-unit demeaning of the response and every column.
  {
    Eigen::MatrixXd col_sums = Eigen::MatrixXd::Zero(n_units, k);
    Eigen::VectorXd y_sums = Eigen::VectorXd::Zero(n_units);
    for (Eigen::Index i = 0; i < Xd.rows(); ++i) {
      col_sums.row(unit[i]) += design.w(i) * Xd.row(i);
      y_sums(unit[i]) += design.w(i) * y(i);
    }
    for (Eigen::Index i = 0; i < Xd.rows(); ++i) {
      int u = unit[i];
      if (unit_w[u] <= 0.0) continue;
      Xd.row(i) -= col_sums.row(u) / unit_w[u];
      yd(i) -= y_sums(u) / unit_w[u];
    }
  }

  check_full_rank(Xd, design.names, design.w);

  Eigen::MatrixXd A =
      Xd.transpose() * design.w.asDiagonal() * Xd;
  Eigen::VectorXd b = Xd.transpose() * (design.w.array() * yd.array()).matrix();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  Eigen::VectorXd beta = ldlt.solve(b);

  Eigen::ArrayXd resid = yd.array() - (Xd * beta).array();
  Eigen::ArrayXd ws = design.w.array() * resid;
  int n_groups = 0;
  std::vector<int> group = dense_groups(design.cluster, n_groups);
  Eigen::MatrixXd cluster_scores = Eigen::MatrixXd::Zero(k, n_groups);
  for (Eigen::Index i = 0; i < Xd.rows(); ++i)
    cluster_scores.col(group[i]) += ws(i) * Xd.row(i).transpose();
  Eigen::MatrixXd B = cluster_scores * cluster_scores.transpose();
  Eigen::MatrixXd V = ldlt.solve(ldlt.solve(B).transpose());
  if (cluster_correction && n_groups > 1)
    V *= static_cast<double>(n_groups) / (n_groups - 1.0);

  FitResult result;
  result.model = "fe-lpm";
  result.beta = beta;
  result.names = design.names;
  result.vcov = 0.5 * (V + V.transpose());
  result.n_obs = Xd.rows();
  result.n_clusters = n_groups;
  result.converged = true;
  return result;
}

int FitResult::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

WaldResult wald_test(const FitResult& fit, const std::vector<int>& coef_indices) {
  if (coef_indices.empty()) throw ValidationError("empty Wald restriction set");
  int q = static_cast<int>(coef_indices.size());
  Eigen::VectorXd b(q);
  Eigen::MatrixXd V(q, q);
  for (int i = 0; i < q; ++i) {
    b(i) = fit.beta(coef_indices[i]);
    for (int j = 0; j < q; ++j) V(i, j) = fit.vcov(coef_indices[i], coef_indices[j]);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(V);
  Eigen::ArrayXd D = ldlt.vectorD().array();
  if (ldlt.info() != Eigen::Success || D.minCoeff() <= 1e-12 * D.maxCoeff()) {
    std::ostringstream msg;
    msg << "Wald restriction covariance is singular; the tested restrictions are "
           "linearly dependent (coefficients:";
    for (int idx : coef_indices) msg << " '" << fit.names[idx] << "'";
    msg << ")";
    throw ValidationError(msg.str());
  }
  WaldResult out;
  out.statistic = b.dot(ldlt.solve(b));
  out.df = q;
  out.p_value = chi2_sf(out.statistic, out.df);
  return out;
}

WaldResult wald_equality(const FitResult& fit, int coef_a, int coef_b) {
  double d = fit.beta(coef_a) - fit.beta(coef_b);
  double var = fit.vcov(coef_a, coef_a) + fit.vcov(coef_b, coef_b) -
               2.0 * fit.vcov(coef_a, coef_b);
  if (var <= 0.0) throw ValidationError("degenerate variance in equality test");
  WaldResult out;
  out.statistic = d * d / var;
  out.df = 1;
  out.p_value = chi2_sf(out.statistic, out.df);
  return out;
}

}  // namespace phishpanel
