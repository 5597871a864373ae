#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ssq/baselines.hpp"
#include "ssq/data.hpp"
#include "ssq/em_ssqlasso.hpp"
#include "ssq/rng.hpp"

namespace ssq {

// Candidate prior scales. Both lists must be ascending and positive; pairs
// with s1 <= s0 are inadmissible and left unscored.
struct TuningGrid {
  std::vector<double> s0_values;
  std::vector<double> s1_values;
};

// score(i, j) belongs to (s0_values[i], s1_values[j]). Inadmissible cells
// hold NaN; degenerate zero-loss SIC cells hold -inf and are never selected.
struct TuningSurface {
  TuningGrid grid;
  Eigen::MatrixXd score;
  int best_s0_index = -1;
  int best_s1_index = -1;
  FitResult best_fit;
  bool warm_started = false;

  double best_s0() const { return grid.s0_values[best_s0_index]; }
  double best_s1() const { return grid.s1_values[best_s1_index]; }
};

// log of the summed check loss plus (log n / 2n) times the effective degrees
// of freedom, counted as the number of nonzero beta coefficients (the
// unpenalized columns add the same constant to every cell and are omitted).
// A zero loss sum returns -inf to flag the degenerate fit.
double sic(const Dataset& data, const FitResult& fit, QuantileLevel tau);

// Scores every admissible cell by SIC of a full-data fit. Among the cells
// whose score lies within the SIC cost of six parameters of the minimum, the
// one with the fewest active coefficients wins; equally sparse cells break
// the tie by score, then by visit order (s1-major with s0 ascending). With
// warm_start every cell is fitted from the one shared lasso_warm_start of
// the data; a cold start at a strong spike stalls at the all-zero mode, and
// chaining cells instead couples them, so a collapse in one cell would wipe
// out the rest of its chain.
TuningSurface grid_search_sic(const Dataset& data, const TuningGrid& grid,
                              const SsqlassoConfig& cfg, bool warm_start = true);

// k-fold cross validation scored by the mean held-out check loss, pooled over
// all n held-out predictions. Folds come from one shuffle of rng; sizes
// differ by at most one. Every cell is fitted from the lasso_warm_start of
// its training split; best_fit is refit on the full data from the full-data
// start.
TuningSurface cv_check_loss(const Dataset& data, const TuningGrid& grid, int k, Rng& rng,
                            const SsqlassoConfig& cfg);

// Same splitter scored by held-out squared error for the Gaussian baseline.
TuningSurface cv_squared_error_sslasso(const Dataset& data, const TuningGrid& grid, int k,
                                       Rng& rng, const SslassoConfig& cfg);

// k-fold CV under squared error over a descending lambda grid; returns the
// index of the winning lambda.
int cv_squared_error_lasso(const Dataset& data, const std::vector<double>& lambda_grid,
                           int k, Rng& rng, const LassoConfig& cfg);

// Coefficient trajectories over ascending s0 at a fixed slab scale. Row g
// holds beta at s0_grid[g], on the original data scale. Every cell is fitted
// from the shared lasso_warm_start of the data.
Eigen::MatrixXd ssqlasso_path(const Dataset& data, double s1_fixed,
                              const std::vector<double>& s0_grid,
                              const SsqlassoConfig& cfg);

// count points spaced geometrically from lo to hi inclusive.
std::vector<double> geometric_grid(double lo, double hi, int count);

// s0: 20 geometric points in [1e-3, 1/2]; s1: {1, 2, 4}.
TuningGrid default_tuning_grid();

// 100 geometric points descending from lambda_max(data) to 1e-3 lambda_max.
std::vector<double> default_lambda_grid(const Dataset& data);

// Deterministic informative start shared by the EM fits: the plain LASSO
// path over default_lambda_grid is scored by the gamma = 1/2 EBIC,
// n log(RSS/n) + (log n + log p) df, restricted to cells with at most n/2
// active coefficients, with alpha refit by least squares at each cell. The
// winner seeds alpha and beta; theta starts at 1/2. sigma starts at the mean
// tau check loss of the winning residuals in the quantile overload and at
// RSS/n in the Gaussian overload, floored away from zero.
WarmStart lasso_warm_start(const Dataset& data, QuantileLevel tau);
WarmStart lasso_warm_start(const Dataset& data);

// One shuffle, then contiguous chunks; the first (n mod k) folds get the
// extra element. Shuffle draws j = next_u64() % (i + 1) Fisher-Yates style.
std::vector<std::vector<int>> kfold_indices(int n, int k, Rng& rng);

// Rows of `data` listed in `rows`, in the given order.
Dataset subset_rows(const Dataset& data, const std::vector<int>& rows);

}  // namespace ssq
