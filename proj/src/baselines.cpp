#include "ssq/baselines.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ssq/errors.hpp"

namespace ssq {

namespace {

double logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

double soft(double x, double threshold) {
  const double shrunk = std::abs(x) - threshold;
  if (shrunk <= 0.0) {
    return 0.0;
  }
  return x > 0.0 ? shrunk : -shrunk;
}

struct GaussianExpectations {
  Eigen::VectorXd eta;
  Eigen::VectorXd s_inv;
};

GaussianExpectations slab_probabilities(const SslassoConfig& cfg, const Eigen::VectorXd& beta,
                                        double theta) {
  GaussianExpectations ex;
  const Eigen::Index p = beta.size();
  ex.eta.resize(p);
  ex.s_inv.resize(p);
  const double prior_odds = std::log(theta) - std::log1p(-theta);
  const double log_scale_ratio = std::log(cfg.s0 / cfg.s1);
  const double rate_gap = 1.0 / cfg.s0 - 1.0 / cfg.s1;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double eta = logistic(prior_odds + log_scale_ratio + rate_gap * std::abs(beta(j)));
    ex.eta(j) = eta;
    ex.s_inv(j) = (1.0 - eta) / cfg.s0 + eta / cfg.s1;
  }
  return ex;
}

double gaussian_objective(const Dataset& data, const SslassoConfig& cfg,
                          const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                          double var, double theta, const GaussianExpectations& ex) {
  const Eigen::VectorXd residual = data.y - data.Z * alpha - data.X * beta;
  double q = -(0.5 * static_cast<double>(data.n()) + 1.0) * std::log(var);
  q -= residual.squaredNorm() / (2.0 * var);
  q -= alpha.squaredNorm() / (2.0 * cfg.v_k);
  q -= (ex.s_inv.array() * beta.array().abs()).sum();
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    q += xlogy(ex.eta(j), theta) + xlogy(1.0 - ex.eta(j), 1.0 - theta);
  }
  return q;
}

struct Scaling {
  Eigen::VectorXd center;
  Eigen::VectorXd scale;
};

Scaling standardize_in_place(Dataset& data) {
  Scaling s;
  const Eigen::Index p = data.X.cols();
  s.center.resize(p);
  s.scale.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    s.center(j) = data.X.col(j).mean();
    data.X.col(j).array() -= s.center(j);
    s.scale(j) = std::sqrt(data.X.col(j).squaredNorm() / static_cast<double>(data.X.rows()));
    if (!(s.scale(j) > 0.0)) {
      throw std::invalid_argument("cannot standardize constant X column " + std::to_string(j));
    }
    data.X.col(j) /= s.scale(j);
  }
  return s;
}

// One pass of cyclic coordinate descent on the LASSO objective; returns the
// largest absolute coefficient change.
double lasso_sweep(const Dataset& data, double lambda, Eigen::VectorXd& alpha,
                   Eigen::VectorXd& beta, Eigen::VectorXd& residual) {
  double max_change = 0.0;
  for (Eigen::Index l = 0; l < data.Z.cols(); ++l) {
    const auto z = data.Z.col(l);
    const double denom = z.squaredNorm();
    const double updated = (residual.dot(z) + alpha(l) * denom) / denom;
    if (!std::isfinite(updated)) {
      throw NumericalError("lasso alpha update non-finite at coordinate " + std::to_string(l));
    }
    max_change = std::max(max_change, std::abs(updated - alpha(l)));
    residual -= (updated - alpha(l)) * z;
    alpha(l) = updated;
  }
  for (Eigen::Index m = 0; m < data.X.cols(); ++m) {
    const auto x = data.X.col(m);
    const double denom = x.squaredNorm();
    const double updated = soft(residual.dot(x) + beta(m) * denom, lambda) / denom;
    if (!std::isfinite(updated)) {
      throw NumericalError("lasso beta update non-finite at coordinate " + std::to_string(m));
    }
    max_change = std::max(max_change, std::abs(updated - beta(m)));
    residual -= (updated - beta(m)) * x;
    beta(m) = updated;
  }
  return max_change;
}

double lasso_objective(double lambda, const Eigen::VectorXd& residual,
                       const Eigen::VectorXd& beta) {
  return 0.5 * residual.squaredNorm() + lambda * beta.array().abs().sum();
}

}  // namespace

SslassoConfig::SslassoConfig(double s0_, double s1_) : s0(s0_), s1(s1_) {
  if (!(s0 > 0.0) || !(s1 >= s0) || !std::isfinite(s1)) {
    throw std::invalid_argument("prior scales must satisfy 0 < s0 <= s1");
  }
}

FitResult fit_sslasso(const Dataset& data, const SslassoConfig& cfg, const WarmStart* warm,
                      FitTrace* trace) {
  validate_dataset(data);
  if (!(cfg.v_k > 0.0) || !(cfg.delta > 0.0) || cfg.max_iter < 1) {
    throw std::invalid_argument("invalid EM settings: require v_k, delta > 0 and max_iter >= 1");
  }

  Dataset work = data;
  Scaling scaling;
  if (cfg.standardize) {
    scaling = standardize_in_place(work);
  }
  const Eigen::Index n = work.n();

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(work.Z.cols());
  alpha(0) = work.y.mean();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(work.X.cols());
  double var = 1.0;
  double theta = 0.5;
  if (warm != nullptr) {
    if (warm->alpha.size() != work.Z.cols() || warm->beta.size() != work.X.cols()) {
      throw std::invalid_argument("warm start dimensions disagree with data");
    }
    if (!(warm->sigma > 0.0) || !(warm->theta >= 0.0) || !(warm->theta <= 1.0)) {
      throw std::invalid_argument("warm start requires sigma > 0 and theta in [0, 1]");
    }
    alpha = warm->alpha;
    beta = warm->beta;
    if (cfg.standardize) {
      beta.array() *= scaling.scale.array();
      alpha(0) += scaling.center.dot(warm->beta);
    }
    var = warm->sigma;
    theta = warm->theta;
  }

  const auto record = [&](std::vector<double>& q_trace, int iteration) {
    const GaussianExpectations ex = slab_probabilities(cfg, beta, theta);
    const double q = gaussian_objective(work, cfg, alpha, beta, var, theta, ex);
    q_trace.push_back(q);
    if (trace != nullptr) {
      SsqlassoState snapshot;
      snapshot.alpha = alpha;
      snapshot.beta = beta;
      snapshot.sigma = var;
      snapshot.theta = theta;
      snapshot.q_value = q;
      snapshot.iteration = iteration;
      trace->push_back(snapshot);
    }
    return q;
  };

  FitResult result;
  double q_prev = record(result.q_trace, 0);
  bool converged = false;
  int iterations = 0;
  while (iterations < cfg.max_iter && !converged) {
    const GaussianExpectations ex = slab_probabilities(cfg, beta, theta);
    theta = ex.eta.mean();
    Eigen::VectorXd residual = work.y - work.Z * alpha - work.X * beta;
    var = residual.squaredNorm() / (static_cast<double>(n) + 2.0);
    if (!std::isfinite(var) || !(var > 0.0)) {
      throw NumericalError("variance update is not a positive finite value");
    }
    for (Eigen::Index l = 0; l < work.Z.cols(); ++l) {
      const auto z = work.Z.col(l);
      const double zsq = z.squaredNorm();
      const double updated =
          (residual.dot(z) + alpha(l) * zsq) / (var / cfg.v_k + zsq);
      if (!std::isfinite(updated)) {
        throw NumericalError("alpha update non-finite at coordinate " + std::to_string(l));
      }
      residual -= (updated - alpha(l)) * z;
      alpha(l) = updated;
    }
    for (Eigen::Index m = 0; m < work.X.cols(); ++m) {
      const auto x = work.X.col(m);
      const double xsq = x.squaredNorm();
      const double t = (residual.dot(x) + beta(m) * xsq) / var;
      const double updated = soft(t, ex.s_inv(m)) / (xsq / var);
      if (!std::isfinite(updated)) {
        throw NumericalError("beta update non-finite at coordinate " + std::to_string(m));
      }
      residual -= (updated - beta(m)) * x;
      beta(m) = updated;
    }
    ++iterations;
    const double q = record(result.q_trace, iterations);
    converged = std::abs(q - q_prev) < cfg.delta;
    q_prev = q;
  }

  result.iterations = iterations;
  result.converged = converged;
  result.sigma = var;
  result.theta = theta;
  result.eta = slab_probabilities(cfg, beta, theta).eta;
  result.alpha = alpha;
  result.beta = beta;
  if (cfg.standardize) {
    result.beta.array() /= scaling.scale.array();
    result.alpha(0) -= scaling.center.dot(result.beta);
  }
  for (Eigen::Index j = 0; j < result.beta.size(); ++j) {
    if (result.beta(j) != 0.0) {
      result.selected.push_back(static_cast<int>(j));
    }
  }
  return result;
}

FitResult fit_lasso(const Dataset& data, const LassoConfig& cfg) {
  validate_dataset(data);
  if (!(cfg.lambda >= 0.0) || !(cfg.tol > 0.0) || cfg.max_iter < 1) {
    throw std::invalid_argument("invalid LASSO settings");
  }
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(data.Z.cols());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(data.X.cols());
  Eigen::VectorXd residual = data.y;

  FitResult result;
  result.q_trace.push_back(-lasso_objective(cfg.lambda, residual, beta));
  bool converged = false;
  int iterations = 0;
  while (iterations < cfg.max_iter && !converged) {
    const double change = lasso_sweep(data, cfg.lambda, alpha, beta, residual);
    ++iterations;
    result.q_trace.push_back(-lasso_objective(cfg.lambda, residual, beta));
    converged = change < cfg.tol;
  }

  result.iterations = iterations;
  result.converged = converged;
  result.sigma = residual.squaredNorm() / static_cast<double>(data.n());
  result.theta = 0.0;
  result.eta = Eigen::VectorXd::Zero(data.X.cols());
  result.alpha = alpha;
  result.beta = beta;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) {
      result.selected.push_back(static_cast<int>(j));
    }
  }
  return result;
}

Eigen::MatrixXd lasso_path(const Dataset& data, const std::vector<double>& lambda_grid,
                           const LassoConfig& cfg) {
  validate_dataset(data);
  if (lambda_grid.empty()) {
    throw std::invalid_argument("lasso_path requires a nonempty grid");
  }
  for (std::size_t g = 0; g < lambda_grid.size(); ++g) {
    if (!(lambda_grid[g] > 0.0) || (g > 0 && !(lambda_grid[g] < lambda_grid[g - 1]))) {
      throw std::invalid_argument("lambda grid must be positive and strictly descending");
    }
  }
  Eigen::MatrixXd path(lambda_grid.size(), data.X.cols());
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(data.Z.cols());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(data.X.cols());
  Eigen::VectorXd residual = data.y;
  for (std::size_t g = 0; g < lambda_grid.size(); ++g) {
    int iterations = 0;
    while (iterations < cfg.max_iter) {
      const double change = lasso_sweep(data, lambda_grid[g], alpha, beta, residual);
      ++iterations;
      if (change < cfg.tol) {
        break;
      }
    }
    path.row(g) = beta.transpose();
  }
  return path;
}

double lasso_lambda_max(const Dataset& data) {
  validate_dataset(data);
  // Least-squares residual of y on the unpenalized block.
  const Eigen::VectorXd gamma = data.Z.colPivHouseholderQr().solve(data.y);
  const Eigen::VectorXd residual = data.y - data.Z * gamma;
  return (data.X.transpose() * residual).array().abs().maxCoeff();
}

}  // namespace ssq
