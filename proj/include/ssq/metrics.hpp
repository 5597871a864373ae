#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ssq/ald.hpp"
#include "ssq/data.hpp"
#include "ssq/em_ssqlasso.hpp"
#include "ssq/rng.hpp"

namespace ssq {

// Support recovery counts; a coordinate is positive when the coefficient is
// exactly nonzero. F1 and MCC fall back to 0 when a denominator marginal is
// empty.
struct IdentificationReport {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int tn = 0;
  double f1 = 0.0;
  double mcc = 0.0;
};

IdentificationReport identification_metrics(const Eigen::VectorXd& beta_hat,
                                            const Eigen::VectorXd& beta_true);

// L1 distance ||beta_hat - beta_true||_1.
double estimation_error(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true);

struct PredictionReport {
  double pmad = 0.0;             // mean |y - yhat|
  double pmse = 0.0;             // mean (y - yhat)^2
  double check_loss_mean = 0.0;  // mean rho_tau(y - yhat)
};

PredictionReport prediction_errors(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat,
                                   QuantileLevel tau);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample sd (divisor n - 1); 0 when fewer than 2 values
};

MeanSd mean_sd(const std::vector<double>& values);

// Trains `fitter` on a random train fraction and scores the held-out rows,
// n_splits times; reports per-metric mean and sd across splits. The fitter
// owns any tuning and must touch only the training rows it is given.
using SplitFitter = std::function<FitResult(const Dataset& train)>;

struct MultiSplitReport {
  MeanSd pmad;
  MeanSd pmse;
  MeanSd check_loss;
  int n_splits = 0;
};

MultiSplitReport multi_split_eval(const Dataset& data, const SplitFitter& fitter,
                                  int n_splits, double train_fraction, QuantileLevel tau,
                                  Rng& rng);

}  // namespace ssq
