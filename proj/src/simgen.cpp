#include "ssq/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ssq {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double t2_cdf(double x) { return 0.5 + x / (2.0 * std::sqrt(2.0 + x * x)); }

double mixture_cdf(double x) {
  return 0.8 * normal_cdf(x) + 0.2 * normal_cdf(x / std::sqrt(3.0));
}

// Monotone CDF inversion on [lo, hi] to width 1e-10.
template <typename Cdf>
double bisect_quantile(const Cdf& cdf, double tau, double lo, double hi) {
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < tau) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double laplace_quantile(double tau) {
  return tau < 0.5 ? std::log(2.0 * tau) : -std::log(2.0 * (1.0 - tau));
}

void check_tau(double tau) {
  if (!(tau > 0.0) || !(tau < 1.0)) {
    throw std::invalid_argument("error spec requires tau in (0, 1)");
  }
}

}  // namespace

double normal_quantile(double tau) {
  check_tau(tau);
  return bisect_quantile(normal_cdf, tau, -40.0, 40.0);
}

CorrelationSpec CorrelationSpec::ar1(double rho) {
  if (!(std::abs(rho) < 1.0)) {
    throw std::invalid_argument("AR1 requires |rho| < 1");
  }
  CorrelationSpec spec;
  spec.kind = Kind::AR1;
  spec.rho = rho;
  return spec;
}

CorrelationSpec CorrelationSpec::banded(double rho) {
  CorrelationSpec spec;
  spec.kind = Kind::Banded;
  spec.rho = rho;
  return spec;
}

CorrelationSpec CorrelationSpec::custom_matrix(Eigen::MatrixXd sigma) {
  CorrelationSpec spec;
  spec.kind = Kind::Custom;
  spec.custom = std::move(sigma);
  return spec;
}

Eigen::MatrixXd gen_predictors(Eigen::Index n, Eigen::Index p, const CorrelationSpec& corr,
                               Rng& rng, bool* repaired) {
  if (n < 1 || p < 1) {
    throw std::invalid_argument("gen_predictors requires n >= 1 and p >= 1");
  }
  if (repaired != nullptr) {
    *repaired = false;
  }
  Eigen::MatrixXd X(n, p);
  switch (corr.kind) {
    case CorrelationSpec::Kind::AR1: {
      const double rho = corr.rho;
      if (!(std::abs(rho) < 1.0)) {
        throw std::invalid_argument("AR1 requires |rho| < 1");
      }
      const double innov = std::sqrt(1.0 - rho * rho);
      for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = rng.normal();
        for (Eigen::Index j = 1; j < p; ++j) {
          X(i, j) = rho * X(i, j - 1) + innov * rng.normal();
        }
      }
      break;
    }
    case CorrelationSpec::Kind::Banded: {
      // Bidiagonal factor B with rows (off_j, d_j): off_1 = 0, d_1 = 1,
      // off_j = rho / d_{j-1}, d_j = sqrt(1 - off_j^2).
      Eigen::VectorXd d(p);
      Eigen::VectorXd off(p);
      d(0) = 1.0;
      off(0) = 0.0;
      for (Eigen::Index j = 1; j < p; ++j) {
        off(j) = corr.rho / d(j - 1);
        const double dsq = 1.0 - off(j) * off(j);
        if (!(dsq > 0.0)) {
          throw std::invalid_argument("banded correlation is not positive definite at this rho");
        }
        d(j) = std::sqrt(dsq);
      }
      Eigen::VectorXd u(p);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
          u(j) = rng.normal();
        }
        X(i, 0) = u(0);
        for (Eigen::Index j = 1; j < p; ++j) {
          X(i, j) = off(j) * u(j - 1) + d(j) * u(j);
        }
      }
      break;
    }
    case CorrelationSpec::Kind::Custom: {
      const Eigen::MatrixXd& sigma = corr.custom;
      if (sigma.rows() != p || sigma.cols() != p) {
        throw std::invalid_argument("custom correlation must be p x p");
      }
      if ((sigma - sigma.transpose()).array().abs().maxCoeff() > 1e-8) {
        throw std::invalid_argument("custom correlation must be symmetric");
      }
      if ((sigma.diagonal().array() - 1.0).abs().maxCoeff() > 1e-8) {
        throw std::invalid_argument("custom correlation must have unit diagonal");
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
          (sigma + sigma.transpose()) / 2.0);
      Eigen::VectorXd values = eig.eigenvalues();
      bool clamped = false;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (values(j) < -1e-6) {
          throw std::invalid_argument("custom correlation is not PSD within repair tolerance");
        }
        if (values(j) < 1e-8) {
          values(j) = 1e-8;
          clamped = true;
        }
      }
      if (clamped && repaired != nullptr) {
        *repaired = true;
      }
      const Eigen::MatrixXd factor =
          eig.eigenvectors() * values.cwiseSqrt().asDiagonal();
      Eigen::VectorXd u(p);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
          u(j) = rng.normal();
        }
        X.row(i) = (factor * u).transpose();
      }
      break;
    }
  }
  return X;
}

double error_location_shift(const ErrorSpec& spec) {
  check_tau(spec.tau);
  switch (spec.family) {
    case ErrorFamily::Normal1:
      return -normal_quantile(spec.tau);
    case ErrorFamily::T2:
      return -bisect_quantile(t2_cdf, spec.tau, -1e8, 1e8);
    case ErrorFamily::LogNormal1:
      return -std::exp(normal_quantile(spec.tau));
    case ErrorFamily::MixtureNormal:
      return -bisect_quantile(mixture_cdf, spec.tau, -80.0, 80.0);
    case ErrorFamily::Laplace1:
      return -laplace_quantile(spec.tau);
  }
  throw std::invalid_argument("unknown error family");
}

Eigen::VectorXd sample_errors(Eigen::Index n, const ErrorSpec& spec, Rng& rng) {
  const double shift = error_location_shift(spec);
  Eigen::VectorXd eps(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double draw = 0.0;
    switch (spec.family) {
      case ErrorFamily::Normal1:
        draw = rng.normal();
        break;
      case ErrorFamily::T2: {
        // t_2 = Z / sqrt(chi^2_2 / 2) and chi^2_2 / 2 is standard exponential.
        const double z = rng.normal();
        const double e = std::max(rng.exponential(1.0), 1e-300);
        draw = z / std::sqrt(e);
        break;
      }
      case ErrorFamily::LogNormal1:
        draw = std::exp(rng.normal());
        break;
      case ErrorFamily::MixtureNormal: {
        const double u = rng.uniform();
        const double z = rng.normal();
        draw = u < 0.8 ? z : std::sqrt(3.0) * z;
        break;
      }
      case ErrorFamily::Laplace1: {
        const double u = rng.uniform();
        draw = u < 0.5 ? std::log(std::max(2.0 * u, 1e-300))
                       : -std::log(std::max(2.0 * (1.0 - u), 1e-300));
        break;
      }
    }
    eps(i) = draw + shift;
  }
  return eps;
}

CoefficientSpec CoefficientSpec::uniform_positive(int support_size) {
  CoefficientSpec spec;
  spec.kind = Kind::UniformPositive;
  spec.support_size = support_size;
  return spec;
}

CoefficientSpec CoefficientSpec::mixed_sign(int support_size) {
  CoefficientSpec spec;
  spec.kind = Kind::MixedSign;
  spec.support_size = support_size;
  return spec;
}

CoefficientSpec CoefficientSpec::explicit_values(std::vector<double> values) {
  CoefficientSpec spec;
  spec.kind = Kind::Explicit;
  spec.values = std::move(values);
  spec.support_size = static_cast<int>(spec.values.size());
  return spec;
}

namespace {

std::vector<Eigen::Index> draw_support(Eigen::Index p, int size, Rng& rng) {
  std::vector<Eigen::Index> pool(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    pool[j] = j;
  }
  for (int i = 0; i < size; ++i) {
    const Eigen::Index j =
        i + static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(p - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<Eigen::Index> support(pool.begin(), pool.begin() + size);
  std::sort(support.begin(), support.end());
  return support;
}

double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

}  // namespace

Eigen::VectorXd gen_coefficients(Eigen::Index p, const CoefficientSpec& spec, Rng& rng) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (spec.kind == CoefficientSpec::Kind::Explicit) {
    if (static_cast<Eigen::Index>(spec.values.size()) > p) {
      throw std::invalid_argument("explicit coefficient list longer than p");
    }
    for (std::size_t j = 0; j < spec.values.size(); ++j) {
      beta(j) = spec.values[j];
    }
    return beta;
  }
  if (spec.support_size < 0 || spec.support_size > p) {
    throw std::invalid_argument("support size must lie in [0, p]");
  }
  const auto support = draw_support(p, spec.support_size, rng);
  const int positives = spec.kind == CoefficientSpec::Kind::MixedSign
                            ? (spec.support_size + 1) / 2
                            : spec.support_size;
  for (int i = 0; i < spec.support_size; ++i) {
    beta(support[i]) = i < positives ? uniform_in(rng, 0.6, 0.8)
                                     : uniform_in(rng, -0.8, -0.6);
  }
  return beta;
}

Eigen::VectorXd assemble_response(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z_cov,
                                  ModelSpec::Kind kind, const Eigen::VectorXd& alpha,
                                  const Eigen::VectorXd& beta, const Eigen::VectorXd& eps) {
  const Eigen::Index n = X.rows();
  if (Z_cov.rows() != n || eps.size() != n || beta.size() != X.cols() ||
      alpha.size() != Z_cov.cols() + 1) {
    throw std::invalid_argument("assemble_response: inconsistent shapes");
  }
  Eigen::VectorXd y = Eigen::VectorXd::Constant(n, alpha(0));
  if (Z_cov.cols() > 0) {
    y += Z_cov * alpha.tail(Z_cov.cols());
  }
  y += X * beta;
  if (kind == ModelSpec::Kind::Heterogeneous) {
    if (X.cols() < 3) {
      throw std::invalid_argument("heterogeneous model requires p >= 3");
    }
    y.array() += (1.0 + X.col(2).array()) * eps.array();
  } else {
    y += eps;
  }
  return y;
}

GeneratedData gen_dataset(Eigen::Index n, Eigen::Index p, const CorrelationSpec& corr,
                          const ModelSpec& model, const ErrorSpec& error, Rng& rng) {
  if (model.kind == ModelSpec::Kind::Heterogeneous && p < 3) {
    throw std::invalid_argument("heterogeneous model requires p >= 3");
  }
  GeneratedData out;
  out.beta_true = gen_coefficients(p, model.coeff, rng);
  if (model.kind == ModelSpec::Kind::Heterogeneous && out.beta_true(2) == 0.0) {
    // Keep the support size: hand the first nonzero coefficient to index 2.
    bool moved = false;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (out.beta_true(j) != 0.0) {
        out.beta_true(2) = out.beta_true(j);
        out.beta_true(j) = 0.0;
        moved = true;
        break;
      }
    }
    if (!moved) {
      out.beta_true(2) = uniform_in(rng, 0.6, 0.8);
    }
  }

  const int q = model.clinical ? model.clinical->q : 0;
  if (q < 0) {
    throw std::invalid_argument("clinical covariate count must be nonnegative");
  }
  out.alpha_true.resize(q + 1);
  out.alpha_true(0) = model.intercept;
  if (q > 0) {
    const auto& given = model.clinical->alpha;
    if (!given.empty() && static_cast<int>(given.size()) != q) {
      throw std::invalid_argument("clinical coefficient list must have length q");
    }
    for (int k = 0; k < q; ++k) {
      out.alpha_true(k + 1) = given.empty() ? uniform_in(rng, 0.6, 0.8) : given[k];
    }
  }

  const Eigen::MatrixXd X = gen_predictors(n, p, corr, rng, &out.correlation_repaired);
  Eigen::MatrixXd Z_cov(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < q; ++k) {
      Z_cov(i, k) = rng.normal();
    }
  }
  const Eigen::VectorXd eps = sample_errors(n, {error.family, error.tau}, rng);
  const Eigen::VectorXd y =
      assemble_response(X, Z_cov, model.kind, out.alpha_true, out.beta_true, eps);
  out.data = make_dataset(y, Z_cov, X);
  return out;
}

}  // namespace ssq
