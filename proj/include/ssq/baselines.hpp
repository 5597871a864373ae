#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ssq/data.hpp"
#include "ssq/em_ssqlasso.hpp"

namespace ssq {

// Gaussian-likelihood counterpart of the quantile fit: same two-scale
// Laplace mixture prior on beta, N(0, V_k) on alpha, scale-invariant prior
// on the variance. EM alternates slab probabilities with one cyclic
// coordinate pass (theta, variance, alpha, soft-thresholded beta).
struct SslassoConfig {
  SslassoConfig(double s0_, double s1_);

  double s0;
  double s1;
  double v_k = 1000.0;
  double delta = 1e-4;
  int max_iter = 500;
  bool standardize = true;
};

// Plain LASSO on (1/2)||y - Z alpha - X beta||^2 + lambda ||beta||_1 with
// unpenalized alpha, by cyclic coordinate descent on X as given.
struct LassoConfig {
  double lambda = 0.0;   // >= 0
  double tol = 1e-8;     // stop when the largest coefficient change is below
  int max_iter = 10000;
};

// FitResult.sigma holds the final variance iterate tilde_sigma^2.
FitResult fit_sslasso(const Dataset& data, const SslassoConfig& cfg,
                      const WarmStart* warm = nullptr, FitTrace* trace = nullptr);

// FitResult.sigma holds RSS/n; q_trace holds the negated objective per sweep.
FitResult fit_lasso(const Dataset& data, const LassoConfig& cfg);

// Warm-started coefficient trajectories. lambda_grid must be positive and
// strictly descending; row g holds beta at lambda_grid[g].
Eigen::MatrixXd lasso_path(const Dataset& data, const std::vector<double>& lambda_grid,
                           const LassoConfig& cfg);

// Smallest lambda that zeroes every beta coordinate: max_m |x_m' r| where r
// is the least-squares residual of y on Z.
double lasso_lambda_max(const Dataset& data);

}  // namespace ssq
