#include "ssq/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ssq/errors.hpp"

namespace ssq {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_grid(const TuningGrid& grid) {
  if (grid.s0_values.empty() || grid.s1_values.empty()) {
    throw std::invalid_argument("tuning grid must be nonempty");
  }
  for (std::size_t i = 0; i < grid.s0_values.size(); ++i) {
    if (!(grid.s0_values[i] > 0.0) ||
        (i > 0 && !(grid.s0_values[i] > grid.s0_values[i - 1]))) {
      throw std::invalid_argument("s0_values must be ascending and positive");
    }
  }
  for (std::size_t j = 0; j < grid.s1_values.size(); ++j) {
    if (!(grid.s1_values[j] > 0.0) ||
        (j > 0 && !(grid.s1_values[j] > grid.s1_values[j - 1]))) {
      throw std::invalid_argument("s1_values must be ascending and positive");
    }
  }
}

struct LassoInit {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  Eigen::VectorXd residual;
};

// EBIC-optimal cell of the plain LASSO path, alpha refit by least squares at
// each cell. The gamma = 1/2 penalty is (log n + log p) per active
// coefficient; cells with more than n/2 active coefficients are not scored.
LassoInit best_ebic_lasso(const Dataset& data) {
  const std::vector<double> grid = default_lambda_grid(data);
  const Eigen::MatrixXd path = lasso_path(data, grid, LassoConfig{});
  const double n = static_cast<double>(data.n());
  const double p = static_cast<double>(data.X.cols());
  const Eigen::Index cap = data.n() / 2;
  double best = std::numeric_limits<double>::infinity();
  LassoInit out;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const Eigen::VectorXd beta = path.row(g).transpose();
    const Eigen::Index df = (beta.array() != 0.0).count();
    if (df > cap) {
      continue;
    }
    const Eigen::VectorXd partial = data.y - data.X * beta;
    const Eigen::VectorXd alpha = data.Z.colPivHouseholderQr().solve(partial);
    const Eigen::VectorXd residual = partial - data.Z * alpha;
    const double rss = residual.squaredNorm();
    const double ebic = n * std::log(std::max(rss, 1e-300) / n) +
                        (std::log(n) + std::log(p)) * static_cast<double>(df);
    if (ebic < best) {
      best = ebic;
      out.alpha = alpha;
      out.beta = beta;
      out.residual = residual;
    }
  }
  if (out.beta.size() == 0) {
    throw NumericalError("no LASSO path cell admissible for the warm start");
  }
  return out;
}

double sd_y(const Dataset& data) {
  const double mean = data.y.mean();
  return std::sqrt((data.y.array() - mean).square().sum() /
                   static_cast<double>(data.n()));
}

void check_folds(Eigen::Index n, int k) {
  if (k < 2 || k > n) {
    throw std::invalid_argument("cross validation requires 2 <= k <= n");
  }
}

}  // namespace

double sic(const Dataset& data, const FitResult& fit, QuantileLevel tau) {
  validate_dataset(data);
  const Eigen::VectorXd residual = data.y - predict(fit, data.Z, data.X);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < residual.size(); ++i) {
    loss += check_loss(residual(i), tau);
  }
  const Eigen::Index edf = (fit.beta.array() != 0.0).count();
  if (!(loss > 0.0)) {
    return kNegInf;
  }
  const double n = static_cast<double>(data.n());
  return std::log(loss) + std::log(n) / (2.0 * n) * static_cast<double>(edf);
}

TuningSurface grid_search_sic(const Dataset& data, const TuningGrid& grid,
                              const SsqlassoConfig& cfg, bool warm_start) {
  check_grid(grid);
  TuningSurface surface;
  surface.grid = grid;
  surface.warm_started = warm_start;
  surface.score = Eigen::MatrixXd::Constant(grid.s0_values.size(), grid.s1_values.size(), kNan);

  WarmStart init;
  if (warm_start) {
    init = lasso_warm_start(data, cfg.tau);
  }
  struct ScoredCell {
    int i, j;
    double score;
    Eigen::Index active;
    FitResult fit;
  };
  std::vector<ScoredCell> finite_cells;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid.s1_values.size(); ++j) {
    for (std::size_t i = 0; i < grid.s0_values.size(); ++i) {
      if (!(grid.s0_values[i] < grid.s1_values[j])) {
        continue;  // inadmissible cell, score stays NaN
      }
      SsqlassoConfig cell = cfg;
      cell.s0 = grid.s0_values[i];
      cell.s1 = grid.s1_values[j];
      FitResult fit_cell = fit(data, cell, warm_start ? &init : nullptr);
      const double score = sic(data, fit_cell, cell.tau);
      surface.score(i, j) = score;
      if (std::isfinite(score)) {
        best = std::min(best, score);
        finite_cells.push_back({static_cast<int>(i), static_cast<int>(j), score,
                                (fit_cell.beta.array() != 0.0).count(),
                                std::move(fit_cell)});
      }
    }
  }
  if (finite_cells.empty()) {
    throw NumericalError("no admissible tuning cell produced a finite score");
  }
  // The sparsest cell scored within the SIC cost of six parameters of the
  // minimum wins; among equally sparse cells the lower score wins.
  const double zone = best + 6.0 * std::log(static_cast<double>(data.n())) /
                                 (2.0 * static_cast<double>(data.n()));
  const ScoredCell* pick = nullptr;
  for (const ScoredCell& cell : finite_cells) {
    if (cell.score > zone) {
      continue;
    }
    if (pick == nullptr || cell.active < pick->active ||
        (cell.active == pick->active && cell.score < pick->score)) {
      pick = &cell;
    }
  }
  surface.best_s0_index = pick->i;
  surface.best_s1_index = pick->j;
  surface.best_fit = pick->fit;
  return surface;
}

std::vector<std::vector<int>> kfold_indices(int n, int k, Rng& rng) {
  check_folds(n, k);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) {
    order[i] = i;
  }
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  std::vector<std::vector<int>> folds(k);
  const int base = n / k;
  const int extra = n % k;
  int pos = 0;
  for (int f = 0; f < k; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + pos, order.begin() + pos + size);
    pos += size;
  }
  return folds;
}

Dataset subset_rows(const Dataset& data, const std::vector<int>& rows) {
  Dataset out;
  out.y.resize(rows.size());
  out.Z.resize(rows.size(), data.Z.cols());
  out.X.resize(rows.size(), data.X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.y(i) = data.y(rows[i]);
    out.Z.row(i) = data.Z.row(rows[i]);
    out.X.row(i) = data.X.row(rows[i]);
  }
  return out;
}

namespace {

// Shared k-fold driver: every admissible cell is fitted on each training
// split from that split's own LASSO warm start, and held-out losses are
// summed per cell.
template <typename InitFn, typename FitCell, typename LossFn>
TuningSurface cv_surface(const Dataset& data, const TuningGrid& grid, int k, Rng& rng,
                         const InitFn& init_fn, const FitCell& fit_cell,
                         const LossFn& loss_fn) {
  check_grid(grid);
  validate_dataset(data);
  check_folds(data.n(), k);

  const auto folds = kfold_indices(static_cast<int>(data.n()), k, rng);
  std::vector<std::vector<int>> train_rows(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) {
        train_rows[f].insert(train_rows[f].end(), folds[g].begin(), folds[g].end());
      }
    }
  }

  TuningSurface surface;
  surface.grid = grid;
  surface.warm_started = true;
  surface.score = Eigen::MatrixXd::Constant(grid.s0_values.size(), grid.s1_values.size(), kNan);
  Eigen::MatrixXd loss_sum =
      Eigen::MatrixXd::Zero(grid.s0_values.size(), grid.s1_values.size());

  for (std::size_t f = 0; f < folds.size(); ++f) {
    const Dataset train = subset_rows(data, train_rows[f]);
    const Dataset test = subset_rows(data, folds[f]);
    const WarmStart init = init_fn(train);
    for (std::size_t j = 0; j < grid.s1_values.size(); ++j) {
      for (std::size_t i = 0; i < grid.s0_values.size(); ++i) {
        if (!(grid.s0_values[i] < grid.s1_values[j])) {
          continue;
        }
        const FitResult fitted =
            fit_cell(train, grid.s0_values[i], grid.s1_values[j], &init);
        const Eigen::VectorXd yhat = predict(fitted, test.Z, test.X);
        loss_sum(i, j) += loss_fn(test.y, yhat);
      }
    }
  }

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid.s1_values.size(); ++j) {
    for (std::size_t i = 0; i < grid.s0_values.size(); ++i) {
      if (!(grid.s0_values[i] < grid.s1_values[j])) {
        continue;
      }
      surface.score(i, j) = loss_sum(i, j) / static_cast<double>(data.n());
      if (surface.score(i, j) < best) {
        best = surface.score(i, j);
        surface.best_s0_index = static_cast<int>(i);
        surface.best_s1_index = static_cast<int>(j);
      }
    }
  }
  if (surface.best_s0_index < 0) {
    throw NumericalError("no admissible tuning cell produced a finite score");
  }
  return surface;
}

}  // namespace

TuningSurface cv_check_loss(const Dataset& data, const TuningGrid& grid, int k, Rng& rng,
                            const SsqlassoConfig& cfg) {
  const auto fit_cell = [&cfg](const Dataset& train, double s0, double s1,
                               const WarmStart* ws) {
    SsqlassoConfig cell = cfg;
    cell.s0 = s0;
    cell.s1 = s1;
    return fit(train, cell, ws);
  };
  TuningSurface surface = cv_surface(
      data, grid, k, rng,
      [&cfg](const Dataset& train) { return lasso_warm_start(train, cfg.tau); },
      fit_cell,
      [&cfg](const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
        double loss = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
          loss += check_loss(y(i) - yhat(i), cfg.tau);
        }
        return loss;
      });
  const WarmStart init = lasso_warm_start(data, cfg.tau);
  surface.best_fit = fit_cell(data, surface.best_s0(), surface.best_s1(), &init);
  return surface;
}

TuningSurface cv_squared_error_sslasso(const Dataset& data, const TuningGrid& grid, int k,
                                       Rng& rng, const SslassoConfig& cfg) {
  const auto fit_cell = [&cfg](const Dataset& train, double s0, double s1,
                               const WarmStart* ws) {
    SslassoConfig cell = cfg;
    cell.s0 = s0;
    cell.s1 = s1;
    return fit_sslasso(train, cell, ws);
  };
  TuningSurface surface = cv_surface(
      data, grid, k, rng,
      [](const Dataset& train) { return lasso_warm_start(train); }, fit_cell,
      [](const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
        return (y - yhat).squaredNorm();
      });
  const WarmStart init = lasso_warm_start(data);
  surface.best_fit = fit_cell(data, surface.best_s0(), surface.best_s1(), &init);
  return surface;
}

int cv_squared_error_lasso(const Dataset& data, const std::vector<double>& lambda_grid,
                           int k, Rng& rng, const LassoConfig& cfg) {
  validate_dataset(data);
  check_folds(data.n(), k);
  if (lambda_grid.empty()) {
    throw std::invalid_argument("lambda grid must be nonempty");
  }
  const auto folds = kfold_indices(static_cast<int>(data.n()), k, rng);
  Eigen::VectorXd loss_sum = Eigen::VectorXd::Zero(lambda_grid.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<int> train_idx;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) {
        train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
      }
    }
    const Dataset train = subset_rows(data, train_idx);
    const Dataset test = subset_rows(data, folds[f]);
    const Eigen::MatrixXd path = lasso_path(train, lambda_grid, cfg);
    // Alpha is refit per lambda on the training rows for held-out prediction.
    for (std::size_t g = 0; g < lambda_grid.size(); ++g) {
      const Eigen::VectorXd partial = train.y - train.X * path.row(g).transpose();
      const Eigen::VectorXd gamma = train.Z.colPivHouseholderQr().solve(partial);
      const Eigen::VectorXd yhat =
          test.Z * gamma + test.X * path.row(g).transpose();
      loss_sum(g) += (test.y - yhat).squaredNorm();
    }
  }
  int best = 0;
  loss_sum.minCoeff(&best);
  return best;
}

Eigen::MatrixXd ssqlasso_path(const Dataset& data, double s1_fixed,
                              const std::vector<double>& s0_grid,
                              const SsqlassoConfig& cfg) {
  if (s0_grid.empty()) {
    throw std::invalid_argument("ssqlasso_path requires a nonempty grid");
  }
  for (std::size_t g = 0; g < s0_grid.size(); ++g) {
    if (!(s0_grid[g] > 0.0) || !(s0_grid[g] < s1_fixed) ||
        (g > 0 && !(s0_grid[g] > s0_grid[g - 1]))) {
      throw std::invalid_argument("s0 grid must be ascending, positive, below s1");
    }
  }
  Eigen::MatrixXd path(s0_grid.size(), data.X.cols());
  const WarmStart init = lasso_warm_start(data, cfg.tau);
  for (std::size_t g = 0; g < s0_grid.size(); ++g) {
    SsqlassoConfig cell = cfg;
    cell.s0 = s0_grid[g];
    cell.s1 = s1_fixed;
    const FitResult fitted = fit(data, cell, &init);
    path.row(g) = fitted.beta.transpose();
  }
  return path;
}

std::vector<double> geometric_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw std::invalid_argument("geometric_grid requires 0 < lo < hi and count >= 2");
  }
  std::vector<double> grid(count);
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (int g = 0; g < count; ++g) {
    grid[g] = lo * std::exp(step * g);
  }
  grid.back() = hi;
  return grid;
}

TuningGrid default_tuning_grid() {
  TuningGrid grid;
  grid.s0_values = geometric_grid(1e-3, 0.5, 20);
  grid.s1_values = {1.0, 2.0, 4.0};
  return grid;
}

std::vector<double> default_lambda_grid(const Dataset& data) {
  const double lmax = lasso_lambda_max(data);
  if (!(lmax > 0.0)) {
    throw NumericalError("lambda_max is not positive; predictors carry no signal");
  }
  std::vector<double> grid = geometric_grid(1e-3 * lmax, lmax, 100);
  std::reverse(grid.begin(), grid.end());
  return grid;
}

WarmStart lasso_warm_start(const Dataset& data, QuantileLevel tau) {
  const LassoInit init = best_ebic_lasso(data);
  WarmStart ws;
  ws.alpha = init.alpha;
  ws.beta = init.beta;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < init.residual.size(); ++i) {
    loss += check_loss(init.residual(i), tau);
  }
  ws.sigma = std::max({loss / static_cast<double>(data.n()), 1e-3 * sd_y(data), 1e-8});
  ws.theta = 0.5;
  return ws;
}

WarmStart lasso_warm_start(const Dataset& data) {
  const LassoInit init = best_ebic_lasso(data);
  WarmStart ws;
  ws.alpha = init.alpha;
  ws.beta = init.beta;
  const double var = sd_y(data) * sd_y(data);
  ws.sigma = std::max({init.residual.squaredNorm() / static_cast<double>(data.n()),
                       1e-6 * var, 1e-8});
  ws.theta = 0.5;
  return ws;
}

}  // namespace ssq
