// Weighted maximum-likelihood binary GLM (probit and logit), Newton-Raphson
// with step halving, analytic gradients, cluster-robust sandwich covariance,
// the within-demeaned linear panel benchmark, and Wald tests. This is the
// numerical core every estimator builds on.
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "phishpanel/normal.hpp"

namespace phishpanel {

enum class Link { Probit, Logit };

std::string link_name(Link link);

inline double link_cdf(Link link, double x) {
  return link == Link::Probit ? normal_cdf(x) : logistic_cdf(x);
}
inline double link_pdf(Link link, double x) {
  return link == Link::Probit ? normal_pdf(x) : logistic_pdf(x);
}
inline double link_quantile(Link link, double p) {
  return link == Link::Probit ? normal_quantile(p) : logistic_quantile(p);
}

struct DesignMatrix {
  Eigen::MatrixXd X;
  std::vector<std::string> names;   // one per column
  std::vector<int> cluster;         // one label per row
  Eigen::VectorXd w;                // observation weights, >= 0

  int n() const { return static_cast<int>(X.rows()); }
  int k() const { return static_cast<int>(X.cols()); }
  int column(const std::string& name) const;  // -1 when absent
  void validate() const;
};

struct FitOptions {
  int max_iterations = 50;
  int max_halvings = 30;
  double gradient_tol = 1e-8;
  // Probit linear predictors are clamped to +/- this many standard units
  // before CDF evaluation.
  double probit_clamp = 8.0;
  bool cluster_correction = false;  // multiply sandwich by G/(G-1)
  double rank_tol = 1e-10;          // relative QR tolerance
};

struct FitResult {
  std::string model;  // "probit", "logit", or "fe-lpm"
  Link link = Link::Probit;
  Eigen::VectorXd beta;
  std::vector<std::string> names;
  Eigen::MatrixXd vcov;  // cluster-robust
  double loglik = 0.0;
  double null_loglik = 0.0;
  double pseudo_r2 = 0.0;
  long long n_obs = 0;
  int n_clusters = 0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
  // The probit clamp was binding at the optimum; estimates near the
  // boundary are suspect.
  bool clamped_at_optimum = false;
  // Convergence was declared because the step-halving line search
  // underflowed rather than because the gradient criterion was met.
  bool step_underflow = false;

  double se(int j) const { return std::sqrt(vcov(j, j)); }
  int column(const std::string& name) const;
};

// Throws CollinearityError when the (weight-scaled) design is rank
// deficient; the message lists each dependent column with the columns that
// span it.
void check_full_rank(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                     const Eigen::VectorXd& w, double rank_tol = 1e-10);

// Throws SeparationError when a single non-constant column strictly
// separates y (no finite MLE exists in that direction).
void check_separation(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                      const Eigen::VectorXd& y, const Eigen::VectorXd& w);

FitResult fit_glm(const DesignMatrix& design, const Eigen::VectorXd& y, Link link,
                  const FitOptions& options = {});

// Weighted log-likelihood and its analytic gradient at beta. Probit score
// terms use the inverse-Mills form, logit the residual form.
std::pair<double, Eigen::VectorXd> loglik_and_gradient(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
    Link link, const Eigen::VectorXd& w, double probit_clamp = 8.0);

// H^-1 B H^-1 with H the observed weighted Hessian and B the outer product
// of cluster-summed weighted scores.
Eigen::MatrixXd cluster_sandwich(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& beta, Link link,
                                 const Eigen::VectorXd& w,
                                 const std::vector<int>& cluster,
                                 bool small_sample_correction = false,
                                 double probit_clamp = 8.0);

// Within-demeaned weighted least squares with unit-clustered covariance;
// accepts continuous responses. The design must not contain an intercept
// (demeaning removes it).
FitResult fe_lpm(const DesignMatrix& design, const Eigen::VectorXd& y,
                 const std::vector<int>& unit_ids, bool cluster_correction = false);

struct WaldResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

// Joint test that the named coefficients are all zero.
WaldResult wald_test(const FitResult& fit, const std::vector<int>& coef_indices);

// Test of equality of two coefficients (one linear restriction).
WaldResult wald_equality(const FitResult& fit, int coef_a, int coef_b);

}  // namespace phishpanel
