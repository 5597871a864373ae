#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ssq/ald.hpp"
#include "ssq/data.hpp"

namespace ssq {

// Posterior-mode EM for quantile regression with a two-scale Laplace
// mixture prior on the penalized coefficients.
//
// Model: y_i = z_i'alpha + x_i'beta + eps_i with eps_i asymmetric Laplace at
// level tau and scale sigma, written as the normal-exponential mixture so the
// latent v_i have a generalized inverse Gaussian conditional with index 1/2.
// Each beta_j carries a Laplace prior whose scale is s1 (slab) or s0 (spike)
// according to a Bernoulli(theta) indicator; alpha_k are N(0, V_k), sigma is
// inverse-gamma (a, b), theta is uniform. The E-step replaces v_i and the
// indicators by conditional expectations; the M-step is one cyclic pass of
// exact coordinate maximization (theta, sigma, alpha, then beta with soft
// thresholding), which yields exact zeros in beta.
struct SsqlassoConfig {
  SsqlassoConfig(QuantileLevel tau_, double s0_, double s1_);

  QuantileLevel tau;
  double s0;  // spike scale, 0 < s0 <= s1
  double s1;  // slab scale; s0 == s1 collapses both components to one Laplace
  double v_k = 1000.0;   // prior variance of each alpha_k
  double a = 1.0;        // inverse-gamma shape for sigma
  double b = 1.0;        // inverse-gamma scale for sigma
  double delta = 1e-4;   // stop when |Q change| < delta
  int max_iter = 500;
  bool standardize = true;  // center/scale X internally, map beta back on exit
};

struct SsqlassoState {
  Eigen::VectorXd alpha;  // q + 1, intercept first
  Eigen::VectorXd beta;   // p
  double sigma = 1.0;
  double theta = 0.5;
  double q_value = 0.0;   // current objective Q, up to an additive constant
  int iteration = 0;
};

struct EStepExpectations {
  Eigen::VectorXd v_inv;  // n, E[1/v_i]
  Eigen::VectorXd v;      // n, E[v_i]
  Eigen::VectorXd eta;    // p, posterior slab probability of each beta_j
  Eigen::VectorXd s_inv;  // p, (1 - eta_j)/s0 + eta_j/s1
};

struct FitResult {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  Eigen::VectorXd eta;
  double sigma = 0.0;
  double theta = 0.0;
  std::vector<double> q_trace;  // objective after each iteration, ascending
  int iterations = 0;
  bool converged = false;
  std::vector<int> selected;  // indices with beta exactly nonzero
};

// Optional initial state for warm starts, on the original data scale.
struct WarmStart {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  double sigma = 1.0;
  double theta = 0.5;
};

// Per-iteration states (internal scale), recorded when a sink is supplied.
using FitTrace = std::vector<SsqlassoState>;

// beta = 0, alpha = 0 except the intercept at the empirical tau-quantile of
// y, sigma = 1, theta = 0.5. Rejects n < 2 and, when cfg.standardize is set,
// constant X columns.
SsqlassoState initialize(const Dataset& data, const SsqlassoConfig& cfg);

// Conditional expectations at the current state. Residual magnitudes are
// floored at 1e-10 * sd(y) before forming the GIG parameter w1 so that zero
// residuals keep finite moments. eta is computed through a logistic in log
// space and never over/underflows.
EStepExpectations e_step(const Dataset& data, const SsqlassoConfig& cfg,
                         const SsqlassoState& st);

// One full cyclic pass: theta, sigma, every alpha_l, every beta_m, each an
// exact coordinate maximizer of Q given the expectations. Throws
// NumericalError on a non-finite update. q_value of the returned state is Q
// evaluated with the supplied expectations.
SsqlassoState m_step(const Dataset& data, const SsqlassoConfig& cfg,
                     const SsqlassoState& st, const EStepExpectations& ex);

// Expected objective Q at (st, ex), up to additive terms that do not depend
// on (alpha, beta, sigma, theta).
double log_joint_posterior(const Dataset& data, const SsqlassoConfig& cfg,
                           const SsqlassoState& st, const EStepExpectations& ex);

FitResult fit(const Dataset& data, const SsqlassoConfig& cfg,
              const WarmStart* warm = nullptr, FitTrace* trace = nullptr);

Eigen::VectorXd predict(const FitResult& fit, const Eigen::MatrixXd& Z,
                        const Eigen::MatrixXd& X);

namespace detail {

// Single-coordinate updates, exposed so stationarity can be probed exactly
// where each update happens. All of them assume residual == y - Z alpha - X beta
// on entry and maintain that identity on exit.
double update_theta(const EStepExpectations& ex);
double update_sigma(const Dataset& data, const SsqlassoConfig& cfg,
                    const EStepExpectations& ex, const Eigen::VectorXd& residual);
double update_alpha_coord(const Dataset& data, const SsqlassoConfig& cfg,
                          const EStepExpectations& ex, double sigma, int l,
                          Eigen::VectorXd& alpha, Eigen::VectorXd& residual);
double update_beta_coord(const Dataset& data, const SsqlassoConfig& cfg,
                         const EStepExpectations& ex, double sigma, int m,
                         Eigen::VectorXd& beta, Eigen::VectorXd& residual);

double soft_threshold(double x, double threshold);

}  // namespace detail

}  // namespace ssq
