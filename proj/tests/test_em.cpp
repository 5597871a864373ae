#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "ssq/data.hpp"
#include "ssq/em_ssqlasso.hpp"
#include "ssq/rng.hpp"

using namespace ssq;

namespace {

Dataset random_dataset(Rng& rng, Eigen::Index n, Eigen::Index p, int signals) {
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      X(i, j) = rng.normal();
    }
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (int s = 0; s < signals; ++s) {
    beta(s) = (s % 2 == 0 ? 1.0 : -1.0) * (0.6 + 0.2 * rng.uniform());
  }
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = 1.0 + X.row(i).dot(beta) + 0.5 * rng.normal();
  }
  return make_dataset(y, X);
}

SsqlassoConfig small_config(double tau, double s0, double s1) {
  SsqlassoConfig cfg(QuantileLevel(tau), s0, s1);
  cfg.standardize = false;
  return cfg;
}

}  // namespace

TEST_CASE("initialize seeds the intercept at the empirical quantile") {
  Eigen::VectorXd y(5);
  y << 1.0, 2.0, 3.0, 4.0, 5.0;
  Eigen::MatrixXd X(5, 3);
  Rng rng(3);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      X(i, j) = rng.normal();
    }
  }
  const Dataset data = make_dataset(y, X);
  const SsqlassoState st = initialize(data, SsqlassoConfig(QuantileLevel(0.5), 0.05, 1.0));
  CHECK(st.alpha.size() == 1);
  CHECK(st.alpha(0) == 3.0);
  CHECK(st.beta.isZero(0.0));
  CHECK(st.beta.size() == 3);
  CHECK(st.sigma == 1.0);
  CHECK(st.theta == 0.5);
  CHECK(std::isfinite(st.q_value));
}

TEST_CASE("initialize rejects a constant column only under standardization") {
  Eigen::VectorXd y(4);
  y << 1.0, 2.0, 0.5, 3.0;
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(4, 2);
  X(1, 1) = -1.0;
  X(2, 1) = 2.0;
  const Dataset data = make_dataset(y, X);

  SsqlassoConfig standardized(QuantileLevel(0.5), 0.05, 1.0);
  CHECK_THROWS_AS(initialize(data, standardized), std::invalid_argument);

  CHECK_NOTHROW(initialize(data, small_config(0.5, 0.05, 1.0)));
}

TEST_CASE("slab probability at beta zero follows the density ratio") {
  Rng rng(5);
  const Dataset data = random_dataset(rng, 12, 4, 0);
  const SsqlassoConfig cfg = small_config(0.5, 0.1, 1.0);
  SsqlassoState st = initialize(data, cfg);
  const EStepExpectations ex = e_step(data, cfg, st);
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    CHECK(std::abs(ex.eta(j) - 0.25 / 2.75) < 1e-12);
    CHECK(std::abs(ex.s_inv(j) - ((1.0 - ex.eta(j)) / 0.1 + ex.eta(j) / 1.0)) < 1e-12);
  }
}

TEST_CASE("slab probabilities grow and thresholds shrink with coefficient size") {
  Rng rng(6);
  const Dataset data = random_dataset(rng, 15, 6, 0);
  const SsqlassoConfig cfg = small_config(0.3, 0.02, 2.0);
  SsqlassoState st = initialize(data, cfg);
  st.beta << 0.0, 0.01, 0.1, 0.5, 1.0, 3.0;
  const EStepExpectations ex = e_step(data, cfg, st);
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    CHECK(ex.s_inv(j) >= 1.0 / cfg.s1 - 1e-15);
    CHECK(ex.s_inv(j) <= 1.0 / cfg.s0 + 1e-15);
    if (j > 0) {
      CHECK(ex.eta(j) >= ex.eta(j - 1));
      CHECK(ex.s_inv(j) <= ex.s_inv(j - 1));
    }
  }
  CHECK(ex.eta(5) > 0.99);
}

TEST_CASE("equal scales collapse the slab probability to theta") {
  Rng rng(7);
  const Dataset data = random_dataset(rng, 10, 3, 0);
  const SsqlassoConfig cfg = small_config(0.5, 0.4, 0.4);
  SsqlassoState st = initialize(data, cfg);
  st.beta << -1.2, 0.0, 0.3;

  st.theta = 0.5;
  EStepExpectations ex = e_step(data, cfg, st);
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    CHECK(ex.eta(j) == 0.5);
    CHECK(std::abs(ex.s_inv(j) - 1.0 / 0.4) < 1e-15);
  }

  st.theta = 0.37;
  ex = e_step(data, cfg, st);
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    CHECK(std::abs(ex.eta(j) - 0.37) < 1e-15);
  }
}

TEST_CASE("zero residuals keep the latent moments finite") {
  Eigen::MatrixXd X(3, 2);
  X << 1.0, -0.5, 0.3, 2.0, -1.0, 0.7;
  Eigen::VectorXd beta(2);
  beta << 0.8, -0.4;
  const Eigen::VectorXd y = X * beta;
  const Dataset data = make_dataset(y, X);
  const SsqlassoConfig cfg = small_config(0.5, 0.05, 1.0);
  SsqlassoState st = initialize(data, cfg);
  st.alpha.setZero();
  st.beta = beta;
  const EStepExpectations ex = e_step(data, cfg, st);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    CHECK(std::isfinite(ex.v_inv(i)));
    CHECK(std::isfinite(ex.v(i)));
    CHECK(ex.v_inv(i) > 0.0);
  }
}

TEST_CASE("soft threshold arithmetic") {
  CHECK(detail::soft_threshold(3.0, 1.0) == 2.0);
  CHECK(detail::soft_threshold(-3.0, 1.0) == -2.0);
  CHECK(detail::soft_threshold(0.5, 1.0) == 0.0);
  CHECK(detail::soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(detail::soft_threshold(2.0, 0.0) == 2.0);
  CHECK(detail::soft_threshold(1.0, 1.0) == 0.0);
}

TEST_CASE("theta update is the mean slab probability") {
  EStepExpectations ex;
  ex.eta.resize(3);
  ex.eta << 0.2, 0.4, 0.9;
  CHECK(std::abs(detail::update_theta(ex) - 0.5) < 1e-15);
  ex.eta.setConstant(0.5);
  CHECK(detail::update_theta(ex) == 0.5);
}

TEST_CASE("beta coordinate update reproduces the worked soft-threshold case") {
  // tau = 1/2 makes zeta1 = 0 and zeta2^2 = 8; sigma = 1/8 puts the
  // quadratic weight at exactly one, so T = 3, threshold 1, denominator 2.
  Eigen::VectorXd y(2);
  y << 1.5, 1.5;
  Eigen::MatrixXd X(2, 1);
  X << 1.0, 1.0;
  const Dataset data = make_dataset(y, X);
  const SsqlassoConfig cfg = small_config(0.5, 1.0, 1.0);

  EStepExpectations ex;
  ex.v_inv = Eigen::VectorXd::Ones(2);
  ex.v = Eigen::VectorXd::Ones(2);
  ex.eta = Eigen::VectorXd::Constant(1, 0.5);
  ex.s_inv = Eigen::VectorXd::Ones(1);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd residual = y;
  const double updated = detail::update_beta_coord(data, cfg, ex, 0.125, 0, beta, residual);
  CHECK(updated == 1.0);
  CHECK(beta(0) == 1.0);
  CHECK(residual(0) == 0.5);
  CHECK(residual(1) == 0.5);

  // |T| = 0.5 below the threshold zeroes the coordinate exactly.
  beta(0) = 0.0;
  residual << 0.25, 0.25;
  const double zeroed = detail::update_beta_coord(data, cfg, ex, 0.125, 0, beta, residual);
  CHECK(zeroed == 0.0);
  CHECK(residual(0) == 0.25);
}

TEST_CASE("objective is linear in a coefficient with a dead predictor column") {
  Eigen::VectorXd y(4);
  y << 0.3, -0.2, 1.1, 0.7;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(4, 2);
  X(0, 0) = 1.0;
  X(2, 0) = -2.0;
  const Dataset data = make_dataset(y, X);
  const SsqlassoConfig cfg = small_config(0.3, 0.1, 1.0);

  SsqlassoState st = initialize(data, cfg);
  const EStepExpectations ex = e_step(data, cfg, st);

  SsqlassoState larger = st;
  larger.beta(1) = 2.5;
  SsqlassoState smaller = st;
  smaller.beta(1) = 1.0;
  const double gap = log_joint_posterior(data, cfg, larger, ex) -
                     log_joint_posterior(data, cfg, smaller, ex);
  CHECK(std::abs(gap - (-ex.s_inv(1) * 1.5)) < 1e-12);
}

TEST_CASE("objective diverges when theta hits zero with positive slab mass") {
  Rng rng(9);
  const Dataset data = random_dataset(rng, 8, 2, 0);
  const SsqlassoConfig cfg = small_config(0.5, 0.1, 1.0);
  SsqlassoState st = initialize(data, cfg);
  const EStepExpectations ex = e_step(data, cfg, st);
  st.theta = 0.0;
  CHECK(log_joint_posterior(data, cfg, st, ex) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("every coordinate update is a coordinate maximizer") {
  Rng rng(21);
  for (int rep = 0; rep < 5; ++rep) {
    const Dataset data = random_dataset(rng, 30, 8, 3);
    const double s0 = 0.02 + 0.05 * rng.uniform();
    const SsqlassoConfig cfg = small_config(rep % 2 == 0 ? 0.5 : 0.3, s0, 1.0 + s0);
    SsqlassoState st = initialize(data, cfg);
    // A few real iterations move the probe away from the cold start.
    const EStepExpectations ex0 = e_step(data, cfg, st);
    st = m_step(data, cfg, st, ex0);
    const EStepExpectations ex1 = e_step(data, cfg, st);
    st = m_step(data, cfg, st, ex1);

    const oracle::FdStationarityReport rep_fd = oracle::fd_stationarity(data, cfg, st);
    CHECK(rep_fd.max_central < 1e-6);
    CHECK(rep_fd.max_ascent < 1e-9);
  }
}

TEST_CASE("m_step reports the objective of the state it returns") {
  Rng rng(13);
  const Dataset data = random_dataset(rng, 25, 6, 2);
  const SsqlassoConfig cfg = small_config(0.5, 0.05, 1.0);
  const SsqlassoState st = initialize(data, cfg);
  const EStepExpectations ex = e_step(data, cfg, st);
  const SsqlassoState next = m_step(data, cfg, st, ex);
  CHECK(std::abs(next.q_value - log_joint_posterior(data, cfg, next, ex)) < 1e-10);
  CHECK(next.q_value >= st.q_value - 1e-8);
  CHECK(next.iteration == st.iteration + 1);
}

TEST_CASE("fit ascends, sparsifies exactly, and lists the support") {
  Rng rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    const Dataset data = random_dataset(rng, 50, 20, 4);
    SsqlassoConfig cfg(QuantileLevel(0.5), 0.01 + 0.02 * rng.uniform(), 1.0);
    const FitResult fit_result = fit(data, cfg);
    REQUIRE(fit_result.q_trace.size() >= 2);
    for (std::size_t d = 1; d < fit_result.q_trace.size(); ++d) {
      CHECK(fit_result.q_trace[d] >= fit_result.q_trace[d - 1] - 1e-8);
    }
    std::vector<int> nonzero;
    for (Eigen::Index j = 0; j < fit_result.beta.size(); ++j) {
      if (fit_result.beta(j) != 0.0) {
        nonzero.push_back(static_cast<int>(j));
        CHECK(std::abs(fit_result.beta(j)) > 1e-12);
      }
    }
    CHECK(nonzero == fit_result.selected);
  }
}

TEST_CASE("fit records one trace state per iteration plus the start") {
  Rng rng(17);
  const Dataset data = random_dataset(rng, 30, 5, 2);
  SsqlassoConfig cfg(QuantileLevel(0.5), 0.05, 1.0);
  cfg.standardize = false;
  FitTrace trace;
  const FitResult fit_result = fit(data, cfg, nullptr, &trace);
  REQUIRE(trace.size() == static_cast<std::size_t>(fit_result.iterations) + 1);
  REQUIRE(fit_result.q_trace.size() == trace.size());
  for (std::size_t d = 0; d < trace.size(); ++d) {
    CHECK(trace[d].q_value == fit_result.q_trace[d]);
  }
  CHECK(trace.back().sigma == fit_result.sigma);
}

TEST_CASE("a single-iteration budget reports non-convergence") {
  Rng rng(19);
  const Dataset data = random_dataset(rng, 30, 5, 2);
  SsqlassoConfig cfg(QuantileLevel(0.5), 0.05, 1.0);
  cfg.max_iter = 1;
  const FitResult fit_result = fit(data, cfg);
  CHECK(fit_result.iterations == 1);
  CHECK_FALSE(fit_result.converged);
}

TEST_CASE("fitting the negated response mirrors the median fit") {
  Rng rng(23);
  const Dataset data = random_dataset(rng, 40, 6, 2);
  Dataset negated = data;
  negated.y = -data.y;

  SsqlassoConfig cfg(QuantileLevel(0.5), 0.03, 1.0);
  const FitResult pos = fit(data, cfg);
  const FitResult neg = fit(negated, cfg);
  for (Eigen::Index j = 0; j < pos.beta.size(); ++j) {
    CHECK(std::abs(pos.beta(j) + neg.beta(j)) < 1e-9);
  }
  CHECK(std::abs(pos.alpha(0) + neg.alpha(0)) < 1e-9);
  CHECK(std::abs(pos.sigma - neg.sigma) < 1e-9);
  CHECK(std::abs(pos.theta - neg.theta) < 1e-9);
}

TEST_CASE("equal scales reduce to the fixed-scale quantile LASSO EM") {
  Rng rng(29);
  const Dataset data = random_dataset(rng, 25, 6, 2);
  const double s = 0.5;
  SsqlassoConfig cfg(QuantileLevel(0.3), s, s);
  cfg.standardize = false;
  cfg.delta = 1e-300;
  cfg.max_iter = 12;
  FitTrace trace;
  fit(data, cfg, nullptr, &trace);

  Eigen::VectorXd alpha0 = Eigen::VectorXd::Zero(1);
  alpha0(0) = empirical_quantile(data.y, 0.3);
  const std::vector<oracle::QlassoIterate> iterates =
      oracle::qlasso_em(data, 0.3, s, cfg.v_k, cfg.a, cfg.b, 1.0, alpha0,
                        Eigen::VectorXd::Zero(data.p()), 12);

  REQUIRE(trace.size() >= iterates.size() + 1);
  for (std::size_t d = 0; d < iterates.size(); ++d) {
    const SsqlassoState& lib = trace[d + 1];
    CHECK(std::abs(lib.sigma - iterates[d].sigma) < 1e-10);
    CHECK(std::abs(lib.theta - 0.5) < 1e-12);
    for (Eigen::Index l = 0; l < lib.alpha.size(); ++l) {
      CHECK(std::abs(lib.alpha(l) - iterates[d].alpha(l)) < 1e-10);
    }
    for (Eigen::Index j = 0; j < lib.beta.size(); ++j) {
      CHECK(std::abs(lib.beta(j) - iterates[d].beta(j)) < 1e-10);
    }
  }
}

TEST_CASE("warm starts are validated and honored") {
  Rng rng(37);
  const Dataset data = random_dataset(rng, 30, 5, 2);
  SsqlassoConfig cfg(QuantileLevel(0.5), 0.05, 1.0);

  WarmStart bad;
  bad.alpha = Eigen::VectorXd::Zero(2);
  bad.beta = Eigen::VectorXd::Zero(5);
  CHECK_THROWS_AS(fit(data, cfg, &bad), std::invalid_argument);

  WarmStart invalid_sigma;
  invalid_sigma.alpha = Eigen::VectorXd::Zero(1);
  invalid_sigma.beta = Eigen::VectorXd::Zero(5);
  invalid_sigma.sigma = 0.0;
  CHECK_THROWS_AS(fit(data, cfg, &invalid_sigma), std::invalid_argument);

  WarmStart ok;
  ok.alpha = Eigen::VectorXd::Zero(1);
  ok.alpha(0) = empirical_quantile(data.y, 0.5);
  ok.beta = Eigen::VectorXd::Zero(5);
  ok.sigma = 1.0;
  ok.theta = 0.5;
  const FitResult from_warm = fit(data, cfg, &ok);
  const FitResult from_cold = fit(data, cfg);
  CHECK(std::abs(from_warm.q_trace.front() - from_cold.q_trace.front()) < 1e-9);
}

TEST_CASE("predict is the linear predictor") {
  FitResult fit_result;
  fit_result.alpha = Eigen::VectorXd::Zero(1);
  fit_result.alpha(0) = 2.5;
  fit_result.beta = Eigen::VectorXd::Zero(3);
  const Eigen::MatrixXd Z = Eigen::MatrixXd::Ones(4, 1);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(4, 3);
  const Eigen::VectorXd constant = predict(fit_result, Z, X);
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(constant(i) == 2.5);
  }

  fit_result.beta << 1.0, -2.0, 0.5;
  Eigen::MatrixXd row_z = Eigen::MatrixXd::Ones(1, 1);
  Eigen::MatrixXd row_x(1, 3);
  row_x << 2.0, 1.0, 4.0;
  const Eigen::VectorXd one = predict(fit_result, row_z, row_x);
  CHECK(std::abs(one(0) - (2.5 + 2.0 - 2.0 + 2.0)) < 1e-14);

  Eigen::MatrixXd wrong = Eigen::MatrixXd::Ones(1, 2);
  CHECK_THROWS_AS(predict(fit_result, row_z, wrong), std::invalid_argument);
}
