#include "ssq/em_ssqlasso.hpp"

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

// x * log(y) with the 0 * log(0) = 0 convention.
double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

void check_config(const SsqlassoConfig& cfg) {
  if (!(cfg.v_k > 0.0) || !(cfg.a > 0.0) || !(cfg.b > 0.0) || !(cfg.delta > 0.0) ||
      cfg.max_iter < 1) {
    throw std::invalid_argument("invalid EM settings: require v_k, a, b, delta > 0 and max_iter >= 1");
  }
}

struct Scaling {
  Eigen::VectorXd center;
  Eigen::VectorXd scale;
};

// Center and scale X columns in place; population sd, constant columns rejected.
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

}  // namespace

SsqlassoConfig::SsqlassoConfig(QuantileLevel tau_, double s0_, double s1_)
    : tau(tau_), s0(s0_), s1(s1_) {
  if (!(s0 > 0.0) || !(s1 >= s0) || !std::isfinite(s1)) {
    throw std::invalid_argument("prior scales must satisfy 0 < s0 <= s1");
  }
}

SsqlassoState initialize(const Dataset& data, const SsqlassoConfig& cfg) {
  validate_dataset(data);
  check_config(cfg);
  if (cfg.standardize) {
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) {
      if (data.X.col(j).maxCoeff() == data.X.col(j).minCoeff()) {
        throw std::invalid_argument("cannot standardize constant X column " + std::to_string(j));
      }
    }
  }
  SsqlassoState st;
  st.alpha = Eigen::VectorXd::Zero(data.Z.cols());
  st.alpha(0) = empirical_quantile(data.y, cfg.tau.value());
  st.beta = Eigen::VectorXd::Zero(data.X.cols());
  st.sigma = 1.0;
  st.theta = 0.5;
  st.iteration = 0;
  st.q_value = log_joint_posterior(data, cfg, st, e_step(data, cfg, st));
  return st;
}

EStepExpectations e_step(const Dataset& data, const SsqlassoConfig& cfg,
                         const SsqlassoState& st) {
  if (!(st.sigma > 0.0) || !std::isfinite(st.sigma)) {
    throw std::invalid_argument("e_step requires sigma > 0");
  }
  const MixtureConstants mc = mixture_constants(cfg.tau);
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();

  EStepExpectations ex;
  ex.v_inv.resize(n);
  ex.v.resize(n);
  const Eigen::VectorXd r = data.y - data.Z * st.alpha - data.X * st.beta;
  double res_floor = 1e-10 * stddev_pop(data.y);
  if (!(res_floor > 0.0)) {
    res_floor = 1e-10;
  }
  const double w2 = std::sqrt((2.0 * mc.zeta2 * mc.zeta2 + mc.zeta1 * mc.zeta1) /
                              (mc.zeta2 * mc.zeta2 * st.sigma));
  const double z2rs = mc.zeta2 * std::sqrt(st.sigma);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w1 = std::max(std::abs(r(i)), res_floor) / z2rs;
    const GigMoments g = gig_moments_half(w1, w2);
    ex.v_inv(i) = g.e_inv_v;
    ex.v(i) = g.e_v;
  }

  ex.eta.resize(p);
  ex.s_inv.resize(p);
  const double prior_odds = std::log(st.theta) - std::log1p(-st.theta);
  const double log_scale_ratio = std::log(cfg.s0 / cfg.s1);
  const double rate_gap = 1.0 / cfg.s0 - 1.0 / cfg.s1;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double eta = logistic(prior_odds + log_scale_ratio + rate_gap * std::abs(st.beta(j)));
    ex.eta(j) = eta;
    ex.s_inv(j) = (1.0 - eta) / cfg.s0 + eta / cfg.s1;
  }
  return ex;
}

namespace detail {

double soft_threshold(double x, double threshold) {
  const double shrunk = std::abs(x) - threshold;
  if (shrunk <= 0.0) {
    return 0.0;
  }
  return x > 0.0 ? shrunk : -shrunk;
}

double update_theta(const EStepExpectations& ex) { return ex.eta.mean(); }

double update_sigma(const Dataset& data, const SsqlassoConfig& cfg,
                    const EStepExpectations& ex, const Eigen::VectorXd& residual) {
  const MixtureConstants mc = mixture_constants(cfg.tau);
  const double z2sq = mc.zeta2 * mc.zeta2;
  const double n = static_cast<double>(data.n());
  const double acc =
      (ex.v_inv.array() * residual.array().square()).sum() -
      2.0 * mc.zeta1 * residual.sum() +
      (mc.zeta1 * mc.zeta1 + 2.0 * z2sq) * ex.v.sum() + 2.0 * z2sq * cfg.b;
  const double sigma = acc / ((3.0 * n + 2.0 * cfg.a + 2.0) * z2sq);
  if (!std::isfinite(sigma) || !(sigma > 0.0)) {
    throw NumericalError("sigma update is not a positive finite value");
  }
  return sigma;
}

double update_alpha_coord(const Dataset& data, const SsqlassoConfig& cfg,
                          const EStepExpectations& ex, double sigma, int l,
                          Eigen::VectorXd& alpha, Eigen::VectorXd& residual) {
  const MixtureConstants mc = mixture_constants(cfg.tau);
  const auto z = data.Z.col(l);
  const double zw = (ex.v_inv.array() * z.array().square()).sum();
  const double num = (ex.v_inv.array() * residual.array() * z.array()).sum() +
                     alpha(l) * zw - mc.zeta1 * z.sum();
  const double denom = mc.zeta2 * mc.zeta2 * sigma / cfg.v_k + zw;
  const double updated = num / denom;
  if (!std::isfinite(updated)) {
    throw NumericalError("alpha update non-finite at coordinate " + std::to_string(l));
  }
  residual -= (updated - alpha(l)) * z;
  alpha(l) = updated;
  return updated;
}

double update_beta_coord(const Dataset& data, const SsqlassoConfig& cfg,
                         const EStepExpectations& ex, double sigma, int m,
                         Eigen::VectorXd& beta, Eigen::VectorXd& residual) {
  const MixtureConstants mc = mixture_constants(cfg.tau);
  const double c = mc.zeta2 * mc.zeta2 * sigma;
  const auto x = data.X.col(m);
  const double xw = (ex.v_inv.array() * x.array().square()).sum();
  const double t = ((ex.v_inv.array() * residual.array() * x.array()).sum() +
                    beta(m) * xw - mc.zeta1 * x.sum()) /
                   c;
  const double updated = soft_threshold(t, ex.s_inv(m)) / (xw / c);
  if (!std::isfinite(updated)) {
    throw NumericalError("beta update non-finite at coordinate " + std::to_string(m));
  }
  residual -= (updated - beta(m)) * x;
  beta(m) = updated;
  return updated;
}

}  // namespace detail

SsqlassoState m_step(const Dataset& data, const SsqlassoConfig& cfg,
                     const SsqlassoState& st, const EStepExpectations& ex) {
  SsqlassoState next = st;
  Eigen::VectorXd residual = data.y - data.Z * st.alpha - data.X * st.beta;
  next.theta = detail::update_theta(ex);
  next.sigma = detail::update_sigma(data, cfg, ex, residual);
  for (Eigen::Index l = 0; l < data.Z.cols(); ++l) {
    detail::update_alpha_coord(data, cfg, ex, next.sigma, static_cast<int>(l), next.alpha,
                               residual);
  }
  for (Eigen::Index m = 0; m < data.X.cols(); ++m) {
    detail::update_beta_coord(data, cfg, ex, next.sigma, static_cast<int>(m), next.beta,
                              residual);
  }
  next.iteration = st.iteration + 1;
  next.q_value = log_joint_posterior(data, cfg, next, ex);
  return next;
}

double log_joint_posterior(const Dataset& data, const SsqlassoConfig& cfg,
                           const SsqlassoState& st, const EStepExpectations& ex) {
  const MixtureConstants mc = mixture_constants(cfg.tau);
  const double z2sq = mc.zeta2 * mc.zeta2;
  const double n = static_cast<double>(data.n());
  const Eigen::VectorXd residual = data.y - data.Z * st.alpha - data.X * st.beta;

  double q = -(1.5 * n + cfg.a + 1.0) * std::log(st.sigma);
  const double quad = (ex.v_inv.array() * residual.array().square()).sum() -
                      2.0 * mc.zeta1 * residual.sum() +
                      mc.zeta1 * mc.zeta1 * ex.v.sum();
  q -= quad / (2.0 * z2sq * st.sigma);
  q -= (ex.v.sum() + cfg.b) / st.sigma;
  q -= st.alpha.squaredNorm() / (2.0 * cfg.v_k);
  q -= (ex.s_inv.array() * st.beta.array().abs()).sum();
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    q += xlogy(ex.eta(j), st.theta) + xlogy(1.0 - ex.eta(j), 1.0 - st.theta);
  }
  return q;
}

FitResult fit(const Dataset& data, const SsqlassoConfig& cfg, const WarmStart* warm,
              FitTrace* trace) {
  validate_dataset(data);
  check_config(cfg);

  Dataset work = data;
  Scaling scaling;
  if (cfg.standardize) {
    scaling = standardize_in_place(work);
  }

  SsqlassoState st = initialize(work, cfg);
  if (warm != nullptr) {
    if (warm->alpha.size() != work.Z.cols() || warm->beta.size() != work.X.cols()) {
      throw std::invalid_argument("warm start dimensions disagree with data");
    }
    if (!(warm->sigma > 0.0) || !(warm->theta >= 0.0) || !(warm->theta <= 1.0)) {
      throw std::invalid_argument("warm start requires sigma > 0 and theta in [0, 1]");
    }
    st.alpha = warm->alpha;
    st.beta = warm->beta;
    if (cfg.standardize) {
      st.beta.array() *= scaling.scale.array();
      st.alpha(0) += scaling.center.dot(warm->beta);
    }
    st.sigma = warm->sigma;
    st.theta = warm->theta;
  }

  EStepExpectations ex = e_step(work, cfg, st);
  st.q_value = log_joint_posterior(work, cfg, st, ex);
  if (trace != nullptr) {
    trace->push_back(st);
  }

  FitResult result;
  result.q_trace.push_back(st.q_value);
  bool converged = false;
  int iterations = 0;
  while (iterations < cfg.max_iter && !converged) {
    SsqlassoState next = m_step(work, cfg, st, ex);
    ex = e_step(work, cfg, next);
    next.q_value = log_joint_posterior(work, cfg, next, ex);
    result.q_trace.push_back(next.q_value);
    converged = std::abs(next.q_value - st.q_value) < cfg.delta;
    st = next;
    ++iterations;
    if (trace != nullptr) {
      trace->push_back(st);
    }
  }

  result.iterations = iterations;
  result.converged = converged;
  result.sigma = st.sigma;
  result.theta = st.theta;
  result.eta = ex.eta;
  result.alpha = st.alpha;
  result.beta = st.beta;
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

Eigen::VectorXd predict(const FitResult& fit, const Eigen::MatrixXd& Z,
                        const Eigen::MatrixXd& X) {
  if (Z.cols() != fit.alpha.size() || X.cols() != fit.beta.size() || Z.rows() != X.rows()) {
    throw std::invalid_argument("predict: column counts must match fitted coefficients");
  }
  return Z * fit.alpha + X * fit.beta;
}

}  // namespace ssq
