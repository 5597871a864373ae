#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ssq/data.hpp"
#include "ssq/rng.hpp"

namespace ssq {

// Rowwise N(0, Sigma) predictor draws with unit marginal variances.
//   AR1:    Sigma_ij = rho^|i-j|, sampled by the stationary recursion
//           x_1 = u_1, x_j = rho x_{j-1} + sqrt(1 - rho^2) u_j.
//   Banded: Sigma_ij = rho when |i-j| = 1, else 1{i==j}; sampled through the
//           bidiagonal Cholesky factor.
//   Custom: explicit symmetric matrix with unit diagonal. Eigenvalues in
//           [-1e-6, 1e-8) are clamped to 1e-8 (nearest-PSD repair, reported
//           through `repaired`); anything below -1e-6 is rejected.
struct CorrelationSpec {
  enum class Kind { AR1, Banded, Custom };

  Kind kind = Kind::AR1;
  double rho = 0.5;
  Eigen::MatrixXd custom;

  static CorrelationSpec ar1(double rho);
  static CorrelationSpec banded(double rho);
  static CorrelationSpec custom_matrix(Eigen::MatrixXd sigma);
};

Eigen::MatrixXd gen_predictors(Eigen::Index n, Eigen::Index p, const CorrelationSpec& corr,
                               Rng& rng, bool* repaired = nullptr);

// Error families. Draws are base-family variates plus the location shift
// that puts the tau-th quantile of the shifted distribution at zero.
enum class ErrorFamily {
  Normal1,        // N(0, 1)
  T2,             // Student t, 2 degrees of freedom
  LogNormal1,     // exp(N(0, 1))
  MixtureNormal,  // 0.8 N(0, 1) + 0.2 N(0, 3), 3 the variance
  Laplace1,       // Laplace(0, 1)
};

struct ErrorSpec {
  ErrorFamily family;
  double tau;  // in (0, 1)
};

// The shift mu with quantile_tau(base + mu) = 0. Closed form for Normal1,
// LogNormal1 and Laplace1; bisection on the CDF to 1e-10 for T2 and
// MixtureNormal.
double error_location_shift(const ErrorSpec& spec);

// n shifted draws. Per variate: Normal1 one normal; T2 one normal then one
// exponential; LogNormal1 one normal; MixtureNormal one uniform then one
// normal; Laplace1 one uniform.
Eigen::VectorXd sample_errors(Eigen::Index n, const ErrorSpec& spec, Rng& rng);

// Phi^{-1}, by bisection on the erfc-based CDF.
double normal_quantile(double tau);

// Sparse coefficient patterns.
//   UniformPositive: `support_size` indices drawn without replacement, then
//     sorted; values U[0.6, 0.8] assigned in index order.
//   MixedSign: same support draw; the first ceil(s/2) sorted indices get
//     U[0.6, 0.8], the rest U[-0.8, -0.6].
//   Explicit: `values` placed at indices 0 .. len-1.
struct CoefficientSpec {
  enum class Kind { UniformPositive, MixedSign, Explicit };

  Kind kind = Kind::UniformPositive;
  int support_size = 15;
  std::vector<double> values;  // Explicit only

  static CoefficientSpec uniform_positive(int support_size);
  static CoefficientSpec mixed_sign(int support_size);
  static CoefficientSpec explicit_values(std::vector<double> values);
};

Eigen::VectorXd gen_coefficients(Eigen::Index p, const CoefficientSpec& spec, Rng& rng);

// Optional unpenalized covariates: q iid N(0, 1) columns whose coefficients
// are either given or drawn U[0.6, 0.8].
struct ClinicalSpec {
  int q = 3;
  std::vector<double> alpha;  // empty: draw
};

// Homogeneous:   y = Z alpha + X beta + eps
// Heterogeneous: y = Z alpha + X beta + (1 + x_2) .* eps, with beta_2 (index
// 2, zero based) forced into the support so the scale covariate always
// matters; requires p >= 3.
struct ModelSpec {
  enum class Kind { Homogeneous, Heterogeneous };

  Kind kind = Kind::Homogeneous;
  CoefficientSpec coeff;
  double intercept = 2.0;
  std::optional<ClinicalSpec> clinical;
};

// Deterministic response assembly from already-drawn pieces. Z_cov holds the
// clinical columns without the intercept (n x q, possibly 0 columns); alpha
// is the full unpenalized vector, intercept first.
Eigen::VectorXd assemble_response(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z_cov,
                                  ModelSpec::Kind kind, const Eigen::VectorXd& alpha,
                                  const Eigen::VectorXd& beta, const Eigen::VectorXd& eps);

struct GeneratedData {
  Dataset data;
  Eigen::VectorXd alpha_true;  // q + 1, intercept first
  Eigen::VectorXd beta_true;   // p
  bool correlation_repaired = false;
};

// Draw order, fixed for reproducibility: beta (support, then values),
// clinical coefficients if drawn, X row by row, clinical covariates row by
// row, errors. With equal seeds the homogeneous and heterogeneous kinds see
// identical X and eps draws.
GeneratedData gen_dataset(Eigen::Index n, Eigen::Index p, const CorrelationSpec& corr,
                          const ModelSpec& model, const ErrorSpec& error, Rng& rng);

}  // namespace ssq
