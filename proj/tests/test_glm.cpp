#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "phishpanel/errors.hpp"
#include "phishpanel/glm.hpp"
#include "phishpanel/rng.hpp"

using namespace phishpanel;

namespace {

DesignMatrix random_design(RngStream& rng, int n, int k) {
  DesignMatrix d;
  d.X.resize(n, k);
  d.names.push_back("intercept");
  for (int j = 1; j < k; ++j) d.names.push_back("x" + std::to_string(j));
  for (int i = 0; i < n; ++i) {
    d.X(i, 0) = 1.0;
    for (int j = 1; j < k; ++j) d.X(i, j) = rng.next_normal();
  }
  d.cluster.resize(n);
  for (int i = 0; i < n; ++i) d.cluster[i] = i;
  d.w = Eigen::VectorXd::Ones(n);
  return d;
}

Eigen::VectorXd random_outcome(RngStream& rng, const DesignMatrix& d,
                               const Eigen::VectorXd& beta, Link link) {
  Eigen::VectorXd y(d.n());
  for (int i = 0; i < d.n(); ++i) {
    double p = link_cdf(link, d.X.row(i).dot(beta));
    y(i) = rng.next_bernoulli(p) ? 1.0 : 0.0;
  }
  return y;
}

}  // namespace

TEST_CASE("analytic gradient matches central differences for both links") {
  RngStream rng(404, 0);
  for (Link link : {Link::Probit, Link::Logit}) {
    for (int rep = 0; rep < 8; ++rep) {
      int n = 40, k = 4;
      DesignMatrix d = random_design(rng, n, k);
      for (int i = 0; i < n; ++i) d.w(i) = 0.2 + rng.next_uniform();
      Eigen::VectorXd beta(k), truth = Eigen::VectorXd::Zero(k);
      truth(0) = -0.3;
      Eigen::VectorXd y = random_outcome(rng, d, truth, link);
      for (int j = 0; j < k; ++j) beta(j) = 0.8 * rng.next_normal();
      auto [ll, grad] = loglik_and_gradient(d.X, y, beta, link, d.w);
      for (int j = 0; j < k; ++j) {
        double h = 1e-5 * std::max(1.0, std::fabs(beta(j)));
        Eigen::VectorXd up = beta, dn = beta;
        up(j) += h;
        dn(j) -= h;
        double fd = (loglik_and_gradient(d.X, y, up, link, d.w).first -
                     loglik_and_gradient(d.X, y, dn, link, d.w).first) /
                    (2 * h);
        CHECK(std::fabs(fd - grad(j)) / std::max(1.0, std::fabs(grad(j))) < 1e-6);
      }
    }
  }
}

TEST_CASE("intercept-only fit inverts the weighted mean") {
  RngStream rng(405, 0);
  int n = 200;
  DesignMatrix d;
  d.X = Eigen::MatrixXd::Ones(n, 1);
  d.names = {"intercept"};
  d.cluster.resize(n);
  d.w.resize(n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    d.cluster[i] = i;
    d.w(i) = 0.1 + 2.0 * rng.next_uniform();
    y(i) = rng.next_bernoulli(0.31) ? 1.0 : 0.0;
  }
  double wmean = (d.w.array() * y.array()).sum() / d.w.sum();
  for (Link link : {Link::Probit, Link::Logit}) {
    FitResult fit = fit_glm(d, y, link);
    REQUIRE(fit.converged);
    CHECK(fit.beta(0) == doctest::Approx(link_quantile(link, wmean)).epsilon(1e-8));
    CHECK(fit.loglik == doctest::Approx(fit.null_loglik));
  }
}

TEST_CASE("scaling all weights leaves the argmax unchanged") {
  RngStream rng(406, 0);
  DesignMatrix d = random_design(rng, 300, 3);
  for (int i = 0; i < d.n(); ++i) d.w(i) = 0.3 + rng.next_uniform();
  Eigen::VectorXd truth(3);
  truth << -0.5, 0.6, -0.2;
  Eigen::VectorXd y = random_outcome(rng, d, truth, Link::Probit);
  FitResult base = fit_glm(d, y, Link::Probit);
  DesignMatrix scaled = d;
  scaled.w *= 37.5;
  FitResult rescaled = fit_glm(scaled, y, Link::Probit);
  REQUIRE(base.converged);
  REQUIRE(rescaled.converged);
  for (int j = 0; j < 3; ++j)
    CHECK(rescaled.beta(j) == doctest::Approx(base.beta(j)).epsilon(1e-8));
  CHECK(rescaled.loglik == doctest::Approx(37.5 * base.loglik).epsilon(1e-8));
}

TEST_CASE("adding a column never lowers the maximized log-likelihood") {
  RngStream rng(407, 0);
  DesignMatrix full = random_design(rng, 250, 4);
  Eigen::VectorXd truth(4);
  truth << -0.4, 0.5, 0.0, 0.3;
  Eigen::VectorXd y = random_outcome(rng, full, truth, Link::Probit);
  DesignMatrix reduced = full;
  reduced.X = full.X.leftCols(3);
  reduced.names.assign(full.names.begin(), full.names.begin() + 3);
  FitResult small = fit_glm(reduced, y, Link::Probit);
  FitResult big = fit_glm(full, y, Link::Probit);
  CHECK(big.loglik >= small.loglik - 1e-9);
  CHECK(big.pseudo_r2 >= small.pseudo_r2 - 1e-9);
}

TEST_CASE("rank-deficient designs raise and name the dependent column") {
  RngStream rng(408, 0);
  DesignMatrix d = random_design(rng, 60, 3);
  d.X.conservativeResize(Eigen::NoChange, 4);
  // Small scale keeps this column last in the pivot order, so it is the one
  // reported as dependent.
  d.X.col(3) = 0.05 * d.X.col(1) + 0.025 * d.X.col(0);
  d.names.push_back("shadow");
  Eigen::VectorXd y(60);
  for (int i = 0; i < 60; ++i) y(i) = rng.next_bernoulli(0.4) ? 1.0 : 0.0;
  try {
    fit_glm(d, y, Link::Probit);
    FAIL("expected CollinearityError");
  } catch (const CollinearityError& err) {
    REQUIRE_FALSE(err.dependent_columns.empty());
    CHECK(err.dependent_columns[0] == "shadow");
    CHECK(std::string(err.what()).find("shadow") != std::string::npos);
  }
}

TEST_CASE("perfectly separated data raise instead of diverging") {
  int n = 80;
  DesignMatrix d;
  d.X.resize(n, 2);
  d.names = {"intercept", "x"};
  d.cluster.resize(n);
  d.w = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd y(n);
  RngStream rng(409, 0);
  for (int i = 0; i < n; ++i) {
    d.X(i, 0) = 1.0;
    d.X(i, 1) = rng.next_normal();
    d.cluster[i] = i;
    y(i) = d.X(i, 1) > 0 ? 1.0 : 0.0;
  }
  CHECK_THROWS_AS(fit_glm(d, y, Link::Logit), SeparationError);
}

TEST_CASE("wald statistics are invariant to column rescaling") {
  RngStream rng(410, 0);
  DesignMatrix d = random_design(rng, 400, 3);
  Eigen::VectorXd truth(3);
  truth << -0.3, 0.4, 0.25;
  Eigen::VectorXd y = random_outcome(rng, d, truth, Link::Probit);
  FitResult base = fit_glm(d, y, Link::Probit);
  DesignMatrix scaled = d;
  scaled.X.col(1) *= 4.0;
  scaled.X.col(2) *= 0.125;
  FitResult refit = fit_glm(scaled, y, Link::Probit);
  WaldResult w1 = wald_test(base, {1, 2});
  WaldResult w2 = wald_test(refit, {1, 2});
  CHECK(w1.df == 2);
  CHECK(w1.statistic == doctest::Approx(w2.statistic).epsilon(1e-6));
  CHECK(w1.p_value == doctest::Approx(w2.p_value).epsilon(1e-6));
  // Single-coefficient test equals the squared z statistic.
  WaldResult single = wald_test(base, {1});
  double z = base.beta(1) / base.se(1);
  CHECK(single.statistic == doctest::Approx(z * z).epsilon(1e-10));
}

TEST_CASE("wald test rejects linearly dependent restrictions") {
  RngStream rng(411, 0);
  DesignMatrix d = random_design(rng, 150, 3);
  Eigen::VectorXd truth(3);
  truth << -0.2, 0.3, -0.3;
  Eigen::VectorXd y = random_outcome(rng, d, truth, Link::Probit);
  FitResult fit = fit_glm(d, y, Link::Probit);
  CHECK_THROWS_AS(wald_test(fit, {1, 1}), ValidationError);
}

TEST_CASE("equality test matches the difference z statistic") {
  RngStream rng(412, 0);
  DesignMatrix d = random_design(rng, 500, 3);
  Eigen::VectorXd truth(3);
  truth << -0.3, 0.35, 0.3;
  Eigen::VectorXd y = random_outcome(rng, d, truth, Link::Probit);
  FitResult fit = fit_glm(d, y, Link::Probit);
  WaldResult eq = wald_equality(fit, 1, 2);
  double var = fit.vcov(1, 1) + fit.vcov(2, 2) - 2 * fit.vcov(1, 2);
  double z = (fit.beta(1) - fit.beta(2)) / std::sqrt(var);
  CHECK(eq.df == 1);
  CHECK(eq.statistic == doctest::Approx(z * z).epsilon(1e-10));
}

TEST_CASE("within-demeaned linear fit recovers an exact slope") {
  DesignMatrix d;
  d.X.resize(5, 1);
  d.X << 0, 1, 2, 1, 3;
  d.names = {"x"};
  d.cluster = {0, 0, 0, 1, 1};
  d.w = Eigen::VectorXd::Ones(5);
  Eigen::VectorXd y(5);
  y << 5, 7, 9, -1, 3;  // unit effects 5 and -3, slope 2, no noise
  FitResult fit = fe_lpm(d, y, {0, 0, 0, 1, 1});
  CHECK(fit.model == "fe-lpm");
  CHECK(fit.beta(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.se(0) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(fit.n_clusters == 2);
}

TEST_CASE("well-behaved fits converge on the gradient criterion") {
  RngStream rng(413, 0);
  DesignMatrix d = random_design(rng, 600, 3);
  Eigen::VectorXd truth(3);
  truth << -0.4, 0.5, -0.25;
  Eigen::VectorXd y = random_outcome(rng, d, truth, Link::Probit);
  FitResult fit = fit_glm(d, y, Link::Probit);
  CHECK(fit.converged);
  CHECK_FALSE(fit.step_underflow);
  CHECK(fit.gradient_norm < 1e-8);
  CHECK(fit.n_obs == 600);
  CHECK(fit.iterations > 0);
}
