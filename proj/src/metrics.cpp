#include "ssq/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace ssq {

IdentificationReport identification_metrics(const Eigen::VectorXd& beta_hat,
                                            const Eigen::VectorXd& beta_true) {
  if (beta_hat.size() != beta_true.size()) {
    throw std::invalid_argument("identification_metrics: length mismatch");
  }
  IdentificationReport rep;
  for (Eigen::Index j = 0; j < beta_hat.size(); ++j) {
    const bool predicted = beta_hat(j) != 0.0;
    const bool actual = beta_true(j) != 0.0;
    if (predicted && actual) {
      ++rep.tp;
    } else if (predicted && !actual) {
      ++rep.fp;
    } else if (!predicted && actual) {
      ++rep.fn;
    } else {
      ++rep.tn;
    }
  }
  const double f1_denom = 2.0 * rep.tp + rep.fp + rep.fn;
  rep.f1 = f1_denom > 0.0 ? 2.0 * rep.tp / f1_denom : 0.0;
  const double m1 = static_cast<double>(rep.tp) + rep.fp;
  const double m2 = static_cast<double>(rep.tp) + rep.fn;
  const double m3 = static_cast<double>(rep.tn) + rep.fp;
  const double m4 = static_cast<double>(rep.tn) + rep.fn;
  if (m1 > 0.0 && m2 > 0.0 && m3 > 0.0 && m4 > 0.0) {
    rep.mcc = (static_cast<double>(rep.tp) * rep.tn - static_cast<double>(rep.fp) * rep.fn) /
              std::sqrt(m1 * m2 * m3 * m4);
  }
  return rep;
}

double estimation_error(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true) {
  if (beta_hat.size() != beta_true.size()) {
    throw std::invalid_argument("estimation_error: length mismatch");
  }
  return (beta_hat - beta_true).array().abs().sum();
}

PredictionReport prediction_errors(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat,
                                   QuantileLevel tau) {
  if (y.size() != yhat.size() || y.size() == 0) {
    throw std::invalid_argument("prediction_errors: need equal nonzero lengths");
  }
  PredictionReport rep;
  const Eigen::ArrayXd diff = (y - yhat).array();
  rep.pmad = diff.abs().mean();
  rep.pmse = diff.square().mean();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < diff.size(); ++i) {
    loss += check_loss(diff(i), tau);
  }
  rep.check_loss_mean = loss / static_cast<double>(diff.size());
  return rep;
}

MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd out;
  if (values.empty()) {
    return out;
  }
  double sum = 0.0;
  for (const double v : values) {
    sum += v;
  }
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) {
    return out;
  }
  double ss = 0.0;
  for (const double v : values) {
    ss += (v - out.mean) * (v - out.mean);
  }
  out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return out;
}

MultiSplitReport multi_split_eval(const Dataset& data, const SplitFitter& fitter,
                                  int n_splits, double train_fraction, QuantileLevel tau,
                                  Rng& rng) {
  validate_dataset(data);
  if (n_splits < 1) {
    throw std::invalid_argument("multi_split_eval requires n_splits >= 1");
  }
  const Eigen::Index n = data.n();
  const auto n_train = static_cast<Eigen::Index>(std::llround(train_fraction * n));
  if (n_train < 2 || n_train > n - 1) {
    throw std::invalid_argument("train fraction leaves too few train or test rows");
  }

  std::vector<int> order(n);
  std::vector<double> pmad;
  std::vector<double> pmse;
  std::vector<double> closs;
  for (int s = 0; s < n_splits; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) {
      order[i] = static_cast<int>(i);
    }
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[i], order[j]);
    }
    Dataset train;
    Dataset test;
    train.y.resize(n_train);
    train.Z.resize(n_train, data.Z.cols());
    train.X.resize(n_train, data.X.cols());
    test.y.resize(n - n_train);
    test.Z.resize(n - n_train, data.Z.cols());
    test.X.resize(n - n_train, data.X.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i < n_train) {
        train.y(i) = data.y(order[i]);
        train.Z.row(i) = data.Z.row(order[i]);
        train.X.row(i) = data.X.row(order[i]);
      } else {
        test.y(i - n_train) = data.y(order[i]);
        test.Z.row(i - n_train) = data.Z.row(order[i]);
        test.X.row(i - n_train) = data.X.row(order[i]);
      }
    }
    const FitResult fitted = fitter(train);
    const PredictionReport rep = prediction_errors(test.y, predict(fitted, test.Z, test.X), tau);
    pmad.push_back(rep.pmad);
    pmse.push_back(rep.pmse);
    closs.push_back(rep.check_loss_mean);
  }

  MultiSplitReport report;
  report.pmad = mean_sd(pmad);
  report.pmse = mean_sd(pmse);
  report.check_loss = mean_sd(closs);
  report.n_splits = n_splits;
  return report;
}

}  // namespace ssq
