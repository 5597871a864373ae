#include "ssq/data.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ssq {

Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd X) {
  Dataset d;
  d.Z = Eigen::MatrixXd::Ones(y.size(), 1);
  d.y = std::move(y);
  d.X = std::move(X);
  return d;
}

Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd Z_covariates, Eigen::MatrixXd X) {
  Dataset d;
  d.Z.resize(y.size(), Z_covariates.cols() + 1);
  d.Z.col(0).setOnes();
  d.Z.rightCols(Z_covariates.cols()) = Z_covariates;
  d.y = std::move(y);
  d.X = std::move(X);
  return d;
}

void validate_dataset(const Dataset& data) {
  const Eigen::Index n = data.y.size();
  if (n < 2) {
    throw std::invalid_argument("dataset requires n >= 2");
  }
  if (data.X.cols() < 1) {
    throw std::invalid_argument("dataset requires p >= 1");
  }
  if (data.Z.rows() != n || data.X.rows() != n) {
    throw std::invalid_argument("dataset row counts disagree");
  }
  if (data.Z.cols() < 1 || (data.Z.col(0).array() != 1.0).any()) {
    throw std::invalid_argument("Z column 0 must be identically 1");
  }
  if (!data.y.allFinite() || !data.Z.allFinite() || !data.X.allFinite()) {
    throw std::invalid_argument("dataset contains non-finite entries");
  }
}

double empirical_quantile(const Eigen::VectorXd& values, double tau) {
  if (values.size() == 0) {
    throw std::invalid_argument("empirical_quantile requires nonempty input");
  }
  if (!(tau >= 0.0) || !(tau <= 1.0)) {
    throw std::invalid_argument("empirical_quantile requires tau in [0, 1]");
  }
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * tau;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) {
    return sorted.back();
  }
  return sorted[lo] + (h - std::floor(h)) * (sorted[lo + 1] - sorted[lo]);
}

double stddev_pop(const Eigen::VectorXd& values) {
  if (values.size() == 0) {
    return 0.0;
  }
  const double mean = values.mean();
  return std::sqrt((values.array() - mean).square().sum() / static_cast<double>(values.size()));
}

}  // namespace ssq
