#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssq/metrics.hpp"
#include "ssq/simgen.hpp"
#include "ssq/tuning.hpp"

namespace ssq {

enum class Method { Ssqlasso, Sslasso, Lasso };

std::string method_name(Method m);
Method parse_method(const std::string& name);

std::string error_family_name(ErrorFamily f);
ErrorFamily parse_error_family(const std::string& name);

struct ScenarioSpec {
  Eigen::Index n = 200;
  Eigen::Index p = 400;
  CorrelationSpec corr = CorrelationSpec::ar1(0.5);
  ModelSpec model;
};

// How each method picks its tuning inside a replicate. The quantile fit uses
// Sic or Cv (check loss); the Gaussian fit swaps Cv for squared-error CV and
// treats Sic the same way; the plain LASSO is always CV tuned over
// default_lambda_grid. Fixed skips tuning and fits at (s0, s1).
struct TuningSpec {
  enum class Mode { Sic, Cv, Fixed };

  Mode mode = Mode::Sic;
  TuningGrid grid = default_tuning_grid();
  int cv_folds = 5;
  double s0 = 0.02;
  double s1 = 2.0;
};

struct EmSettings {
  double v_k = 1000.0;
  double a = 1.0;
  double b = 1.0;
  double delta = 1e-4;
  int max_iter = 500;
  bool standardize = true;
};

struct ReplicationPlan {
  ScenarioSpec scenario;
  std::vector<Method> methods = {Method::Ssqlasso};
  std::vector<double> taus = {0.5};
  std::vector<ErrorFamily> errors = {ErrorFamily::Normal1};
  TuningSpec tuning;
  EmSettings em;
  int replicates = 30;
  std::uint64_t base_seed = 1;
  int threads = 1;
};

struct ReplicateRecord {
  Method method = Method::Ssqlasso;
  double tau = 0.5;
  ErrorFamily error = ErrorFamily::Normal1;
  int replicate = 0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int tn = 0;
  double f1 = 0.0;
  double mcc = 0.0;
  double est = 0.0;
  bool ok = false;
  std::string message;  // failure diagnostic when !ok
};

struct AggregateRow {
  Method method = Method::Ssqlasso;
  double tau = 0.5;
  ErrorFamily error = ErrorFamily::Normal1;
  int n_ok = 0;
  MeanSd tp, fp, f1, mcc, est;
};

struct ReplicationResult {
  std::vector<ReplicateRecord> records;  // (tau, error, replicate) major, method minor
  std::vector<AggregateRow> table;       // one row per (method, tau, error)
};

// Replicate r draws its data from Rng(base_seed + r), one dataset per
// (tau, error, r) shared by every method, so the comparison is paired and
// the result does not depend on the number of threads.
ReplicationResult run_replication(const ReplicationPlan& plan);

// Single-replicate building block used by run_replication: tune and fit one
// method on one dataset. The rng seeds fold splits for CV tuning.
FitResult fit_method(Method method, const Dataset& data, double tau,
                     const TuningSpec& tuning, const EmSettings& em, Rng& rng);

}  // namespace ssq
