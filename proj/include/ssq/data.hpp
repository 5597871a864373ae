#pragma once

#include <Eigen/Dense>

namespace ssq {

// Regression data. Z always carries the intercept in column 0, so it has
// q + 1 columns for q additional unpenalized covariates; X holds the p
// penalized predictors.
struct Dataset {
  Eigen::VectorXd y;  // n
  Eigen::MatrixXd Z;  // n x (q + 1), column 0 identically 1
  Eigen::MatrixXd X;  // n x p

  Eigen::Index n() const { return y.size(); }
  Eigen::Index q() const { return Z.cols() - 1; }
  Eigen::Index p() const { return X.cols(); }
};

// Builds a dataset with an intercept-only Z when no covariates are given.
Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd X);
Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd Z_covariates, Eigen::MatrixXd X);

// Throws std::invalid_argument on shape mismatch, n < 2, p < 1, non-finite
// entries, or a Z first column that is not identically 1.
void validate_dataset(const Dataset& data);

// Linear-interpolation empirical quantile (the R type-7 convention):
// h = (n - 1) tau, q = x_(floor h) + (h - floor h)(x_(floor h + 1) - x_(floor h)).
double empirical_quantile(const Eigen::VectorXd& values, double tau);

// Population standard deviation (divisor n).
double stddev_pop(const Eigen::VectorXd& values);

}  // namespace ssq
