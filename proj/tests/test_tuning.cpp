#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "ssq/ald.hpp"
#include "ssq/baselines.hpp"
#include "ssq/data.hpp"
#include "ssq/em_ssqlasso.hpp"
#include "ssq/errors.hpp"
#include "ssq/rng.hpp"
#include "ssq/tuning.hpp"

using namespace ssq;

namespace {

Dataset easy_dataset(unsigned seed, int n, int p, double b0, double b1, double noise) {
  Rng rng(seed);
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      X(i, j) = rng.normal();
    }
  }
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    y(i) = 0.5 + b0 * X(i, 0) + b1 * X(i, 1) + noise * rng.normal();
  }
  return make_dataset(y, X);
}

std::vector<int> support(const Eigen::VectorXd& beta) {
  std::vector<int> out;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) {
      out.push_back(static_cast<int>(j));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("geometric_grid spans the endpoints with a constant ratio") {
  const std::vector<double> grid = geometric_grid(1e-3, 0.5, 20);
  REQUIRE(grid.size() == 20);
  CHECK(grid.front() == 1e-3);
  CHECK(grid.back() == 0.5);
  const double ratio = grid[1] / grid[0];
  for (std::size_t g = 1; g < grid.size(); ++g) {
    CHECK(grid[g] > grid[g - 1]);
    CHECK(std::abs(grid[g] / grid[g - 1] - ratio) < 1e-9);
  }

  const std::vector<double> pair = geometric_grid(2.0, 8.0, 3);
  CHECK(std::abs(pair[1] - 4.0) < 1e-12);

  CHECK_THROWS_AS(geometric_grid(0.0, 1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(geometric_grid(1.0, 1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(geometric_grid(2.0, 1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(geometric_grid(1.0, 2.0, 1), std::invalid_argument);
}

TEST_CASE("default grids have the documented shapes") {
  const TuningGrid grid = default_tuning_grid();
  REQUIRE(grid.s0_values.size() == 20);
  CHECK(grid.s0_values.front() == 1e-3);
  CHECK(grid.s0_values.back() == 0.5);
  REQUIRE(grid.s1_values.size() == 3);
  CHECK(grid.s1_values[0] == 1.0);
  CHECK(grid.s1_values[1] == 2.0);
  CHECK(grid.s1_values[2] == 4.0);

  const Dataset data = easy_dataset(11, 30, 4, 1.0, -1.0, 0.5);
  const double lmax = lasso_lambda_max(data);
  const std::vector<double> lambdas = default_lambda_grid(data);
  REQUIRE(lambdas.size() == 100);
  CHECK(lambdas.front() == lmax);
  CHECK(std::abs(lambdas.back() - 1e-3 * lmax) < 1e-12 * lmax);
  for (std::size_t g = 1; g < lambdas.size(); ++g) {
    CHECK(lambdas[g] < lambdas[g - 1]);
  }
}

TEST_CASE("kfold_indices partitions the rows with near-equal folds") {
  Rng rng(5);
  const auto folds = kfold_indices(10, 3, rng);
  REQUIRE(folds.size() == 3);
  CHECK(folds[0].size() == 4);
  CHECK(folds[1].size() == 3);
  CHECK(folds[2].size() == 3);
  std::set<int> seen;
  for (const auto& fold : folds) {
    for (int idx : fold) {
      CHECK(idx >= 0);
      CHECK(idx < 10);
      CHECK(seen.insert(idx).second);
    }
  }
  CHECK(seen.size() == 10);

  Rng again(5);
  CHECK(kfold_indices(10, 3, again) == folds);

  Rng bad(5);
  CHECK_THROWS_AS(kfold_indices(10, 1, bad), std::invalid_argument);
  CHECK_THROWS_AS(kfold_indices(3, 4, bad), std::invalid_argument);
}

TEST_CASE("subset_rows copies the listed rows in order") {
  const Dataset data = easy_dataset(7, 6, 2, 1.0, 0.0, 0.1);
  const std::vector<int> rows = {4, 0, 4};
  const Dataset sub = subset_rows(data, rows);
  REQUIRE(sub.n() == 3);
  CHECK(sub.y(0) == data.y(4));
  CHECK(sub.y(1) == data.y(0));
  CHECK(sub.y(2) == data.y(4));
  CHECK((sub.Z.row(1) - data.Z.row(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((sub.X.row(0) - data.X.row(4)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(sub.X.cols() == data.X.cols());
}

TEST_CASE("sic scores the summed check loss plus the sparsity charge") {
  Eigen::VectorXd y(4);
  y << 1.0, 2.0, 3.0, 4.0;
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(4, 3);
  X.col(1) << 0.5, -0.5, 0.5, -0.5;
  X.col(2) << 2.0, 1.0, -1.0, -2.0;
  const Dataset data = make_dataset(y, X);

  FitResult fit_result;
  fit_result.alpha = Eigen::VectorXd::Constant(1, 0.5);
  fit_result.beta = Eigen::VectorXd::Zero(3);
  fit_result.beta(0) = 0.4;
  // Residuals (0.1, 1.1, 2.1, 3.1): loss 3.2 at tau = 1/2, 1.92 at tau = 0.3.
  CHECK(std::abs(sic(data, fit_result, QuantileLevel(0.5)) - 1.3364376049456672) < 1e-12);
  CHECK(std::abs(sic(data, fit_result, QuantileLevel(0.3)) - 0.8256119811796765) < 1e-12);

  // Nonzero alpha does not count toward the degrees of freedom.
  fit_result.beta.setZero();
  const Eigen::VectorXd r = y.array() - 0.5;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    loss += check_loss(r(i), 0.5);
  }
  CHECK(std::abs(sic(data, fit_result, QuantileLevel(0.5)) - std::log(loss)) < 1e-12);

  // An interpolating fit has zero loss and flags itself as degenerate.
  FitResult exact_fit;
  exact_fit.alpha = Eigen::VectorXd::Zero(1);
  exact_fit.beta = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd flat = Eigen::VectorXd::Zero(4);
  const Dataset interpolated = make_dataset(flat, X);
  CHECK(sic(interpolated, exact_fit, QuantileLevel(0.5)) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("grid_search_sic validates the grid and needs one admissible cell") {
  const Dataset data = easy_dataset(13, 30, 4, 1.0, -1.0, 0.5);
  const SsqlassoConfig cfg(QuantileLevel(0.5), 0.1, 1.0);

  TuningGrid bad;
  bad.s1_values = {1.0};
  CHECK_THROWS_AS(grid_search_sic(data, bad, cfg), std::invalid_argument);
  bad.s0_values = {0.2, 0.1};
  CHECK_THROWS_AS(grid_search_sic(data, bad, cfg), std::invalid_argument);
  bad.s0_values = {-0.1, 0.2};
  CHECK_THROWS_AS(grid_search_sic(data, bad, cfg), std::invalid_argument);

  TuningGrid inadmissible;
  inadmissible.s0_values = {0.5, 1.0};
  inadmissible.s1_values = {0.5};
  CHECK_THROWS_AS(grid_search_sic(data, inadmissible, cfg), NumericalError);

  TuningGrid mixed;
  mixed.s0_values = {0.05, 0.8};
  mixed.s1_values = {0.5};
  const TuningSurface surface = grid_search_sic(data, mixed, cfg);
  CHECK(std::isfinite(surface.score(0, 0)));
  CHECK(std::isnan(surface.score(1, 0)));
  CHECK(surface.best_s0_index == 0);
  CHECK(surface.warm_started);
  CHECK_FALSE(grid_search_sic(data, mixed, cfg, false).warm_started);
}

TEST_CASE("grid_search_sic selection matches an independent replay of its rule") {
  const Dataset data = easy_dataset(101, 80, 10, 0.9, -0.8, 0.3);
  TuningGrid grid;
  grid.s0_values = geometric_grid(0.005, 0.3, 6);
  grid.s1_values = {0.8, 1.5};
  const SsqlassoConfig cfg(QuantileLevel(0.5), 0.1, 1.0);
  const TuningSurface surface = grid_search_sic(data, grid, cfg);

  const WarmStart init = lasso_warm_start(data, cfg.tau);
  double best = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd score(6, 2);
  score.setConstant(std::numeric_limits<double>::quiet_NaN());
  struct Cell {
    int i, j;
    double score;
    Eigen::Index active;
  };
  std::vector<Cell> cells;
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 6; ++i) {
      if (!(grid.s0_values[i] < grid.s1_values[j])) {
        continue;
      }
      SsqlassoConfig cell_cfg = cfg;
      cell_cfg.s0 = grid.s0_values[i];
      cell_cfg.s1 = grid.s1_values[j];
      const FitResult cell_fit = fit(data, cell_cfg, &init);
      score(i, j) = sic(data, cell_fit, cfg.tau);
      if (std::isfinite(score(i, j))) {
        best = std::min(best, score(i, j));
        cells.push_back({i, j, score(i, j), (cell_fit.beta.array() != 0.0).count()});
      }
    }
  }
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 6; ++i) {
      if (std::isnan(score(i, j))) {
        CHECK(std::isnan(surface.score(i, j)));
      } else {
        CHECK(surface.score(i, j) == score(i, j));
      }
    }
  }
  const double zone =
      best + 6.0 * std::log(static_cast<double>(data.n())) / (2.0 * data.n());
  const Cell* pick = nullptr;
  for (const Cell& cell : cells) {
    if (cell.score > zone) {
      continue;
    }
    if (pick == nullptr || cell.active < pick->active ||
        (cell.active == pick->active && cell.score < pick->score)) {
      pick = &cell;
    }
  }
  REQUIRE(pick != nullptr);
  CHECK(surface.best_s0_index == pick->i);
  CHECK(surface.best_s1_index == pick->j);
}

TEST_CASE("a superset grid never has a worse minimal score") {
  const Dataset data = easy_dataset(202, 60, 8, 0.9, -0.8, 0.4);
  const SsqlassoConfig cfg(QuantileLevel(0.5), 0.1, 1.0);

  TuningGrid sub;
  sub.s0_values = {0.01, 0.1};
  sub.s1_values = {1.0};
  TuningGrid super;
  super.s0_values = {0.01, 0.05, 0.1};
  super.s1_values = {1.0, 2.0};

  const TuningSurface sub_surface = grid_search_sic(data, sub, cfg);
  const TuningSurface super_surface = grid_search_sic(data, super, cfg);

  const auto min_finite = [](const Eigen::MatrixXd& m) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (std::isfinite(m(i, j))) {
          best = std::min(best, m(i, j));
        }
      }
    }
    return best;
  };
  CHECK(min_finite(super_surface.score) <= min_finite(sub_surface.score) + 1e-15);
  // Shared cells are scored identically: both grids fit from the same start.
  CHECK(super_surface.score(0, 0) == sub_surface.score(0, 0));
  CHECK(super_surface.score(2, 0) == sub_surface.score(1, 0));
}

TEST_CASE("sic tuning recovers a planted support") {
  for (unsigned seed : {101u, 202u, 303u}) {
    const Dataset data = easy_dataset(seed, 80, 10, 0.9, -0.8, 0.3);
    TuningGrid grid;
    grid.s0_values = geometric_grid(0.005, 0.3, 6);
    grid.s1_values = {1.0};
    const SsqlassoConfig cfg(QuantileLevel(0.5), 0.1, 1.0);
    const TuningSurface surface = grid_search_sic(data, grid, cfg);
    CHECK(support(surface.best_fit.beta) == std::vector<int>{0, 1});
    CHECK(surface.best_fit.beta(0) > 0.5);
    CHECK(surface.best_fit.beta(1) < -0.5);
  }
}

TEST_CASE("cv_check_loss equals an independent replay of its folds") {
  const Dataset data = easy_dataset(17, 40, 5, 1.0, -0.9, 0.4);
  TuningGrid grid;
  grid.s0_values = {0.02};
  grid.s1_values = {1.0};
  const SsqlassoConfig cfg(QuantileLevel(0.3), 0.1, 1.0);

  Rng rng(99);
  const TuningSurface surface = cv_check_loss(data, grid, 4, rng, cfg);

  Rng replay(99);
  const auto folds = kfold_indices(40, 4, replay);
  double loss_sum = 0.0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<int> train_rows;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) {
        train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
      }
    }
    const Dataset train = subset_rows(data, train_rows);
    const Dataset test = subset_rows(data, folds[f]);
    const WarmStart init = lasso_warm_start(train, cfg.tau);
    SsqlassoConfig cell = cfg;
    cell.s0 = 0.02;
    cell.s1 = 1.0;
    const FitResult fitted = fit(train, cell, &init);
    const Eigen::VectorXd yhat = predict(fitted, test.Z, test.X);
    for (Eigen::Index i = 0; i < test.n(); ++i) {
      loss_sum += check_loss(test.y(i) - yhat(i), 0.3);
    }
  }
  CHECK(std::abs(surface.score(0, 0) - loss_sum / 40.0) < 1e-12);
  CHECK(surface.best_s0_index == 0);
  CHECK(surface.best_s1_index == 0);

  // best_fit is refit on the full data from the full-data start.
  const WarmStart full_init = lasso_warm_start(data, cfg.tau);
  SsqlassoConfig cell = cfg;
  cell.s0 = 0.02;
  cell.s1 = 1.0;
  const FitResult refit = fit(data, cell, &full_init);
  CHECK((surface.best_fit.beta - refit.beta).cwiseAbs().maxCoeff() == 0.0);

  Rng rng2(99);
  const TuningSurface again = cv_check_loss(data, grid, 4, rng2, cfg);
  CHECK(again.score(0, 0) == surface.score(0, 0));
}

TEST_CASE("cv_squared_error_sslasso is deterministic with positive scores") {
  const Dataset data = easy_dataset(19, 40, 5, 1.0, -0.9, 0.4);
  TuningGrid grid;
  grid.s0_values = {0.02, 0.2};
  grid.s1_values = {1.0};
  const SslassoConfig cfg(0.1, 1.0);

  Rng rng_a(7);
  const TuningSurface a = cv_squared_error_sslasso(data, grid, 5, rng_a, cfg);
  Rng rng_b(7);
  const TuningSurface b = cv_squared_error_sslasso(data, grid, 5, rng_b, cfg);
  CHECK((a.score - b.score).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.best_s0_index == b.best_s0_index);
  for (int i = 0; i < 2; ++i) {
    CHECK(a.score(i, 0) > 0.0);
    CHECK(std::isfinite(a.score(i, 0)));
  }
  CHECK(a.best_fit.beta.size() == data.p());
}

TEST_CASE("cv_squared_error_lasso equals an independent replay") {
  const Dataset data = easy_dataset(23, 24, 4, 1.0, -0.9, 0.4);
  const std::vector<double> lambdas = {8.0, 2.0, 0.5};
  LassoConfig cfg;

  Rng rng(31);
  const int winner = cv_squared_error_lasso(data, lambdas, 3, rng, cfg);

  Rng replay(31);
  const auto folds = kfold_indices(24, 3, replay);
  Eigen::VectorXd loss_sum = Eigen::VectorXd::Zero(3);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<int> train_rows;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) {
        train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
      }
    }
    const Dataset train = subset_rows(data, train_rows);
    const Dataset test = subset_rows(data, folds[f]);
    const Eigen::MatrixXd path = lasso_path(train, lambdas, cfg);
    for (Eigen::Index g = 0; g < 3; ++g) {
      const Eigen::VectorXd partial = train.y - train.X * path.row(g).transpose();
      const Eigen::VectorXd gamma = train.Z.colPivHouseholderQr().solve(partial);
      const Eigen::VectorXd yhat = test.Z * gamma + test.X * path.row(g).transpose();
      loss_sum(g) += (test.y - yhat).squaredNorm();
    }
  }
  int expected = 0;
  loss_sum.minCoeff(&expected);
  CHECK(winner == expected);
  CHECK(winner >= 0);
  CHECK(winner < 3);
}

TEST_CASE("ssqlasso_path tracks the spike grid without mode jumps") {
  const Dataset data = easy_dataset(101, 80, 10, 0.9, -0.8, 0.3);
  const SsqlassoConfig cfg(QuantileLevel(0.5), 0.1, 1.0);
  const std::vector<double> s0_grid = geometric_grid(0.005, 0.45, 12);
  const Eigen::MatrixXd path = ssqlasso_path(data, 1.0, s0_grid, cfg);
  REQUIRE(path.rows() == 12);
  REQUIRE(path.cols() == 10);
  for (Eigen::Index g = 1; g < path.rows(); ++g) {
    CHECK((path.row(g) - path.row(g - 1)).cwiseAbs().maxCoeff() < 0.2);
  }
  CHECK(path(0, 0) > 0.5);
  CHECK(path(0, 1) < -0.5);

  const Eigen::MatrixXd again = ssqlasso_path(data, 1.0, s0_grid, cfg);
  CHECK((again - path).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(ssqlasso_path(data, 1.0, {}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(ssqlasso_path(data, 1.0, {0.2, 0.1}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(ssqlasso_path(data, 1.0, {0.5, 1.0}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(ssqlasso_path(data, 1.0, {-0.1, 0.2}, cfg), std::invalid_argument);
}

TEST_CASE("lasso_warm_start seeds a sparse informative state") {
  const Dataset data = easy_dataset(101, 80, 10, 0.9, -0.8, 0.3);

  const WarmStart quant = lasso_warm_start(data, QuantileLevel(0.5));
  CHECK(quant.alpha.size() == 1);
  CHECK(quant.beta.size() == 10);
  CHECK(quant.theta == 0.5);
  CHECK(support(quant.beta) == std::vector<int>{0, 1});
  CHECK(static_cast<Eigen::Index>(support(quant.beta).size()) <= data.n() / 2);

  const Eigen::VectorXd residual = data.y - data.Z * quant.alpha - data.X * quant.beta;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < residual.size(); ++i) {
    loss += check_loss(residual(i), 0.5);
  }
  const double sd = stddev_pop(data.y);
  const double expected = std::max({loss / 80.0, 1e-3 * sd, 1e-8});
  CHECK(std::abs(quant.sigma - expected) < 1e-12);

  const WarmStart gauss = lasso_warm_start(data);
  CHECK(support(gauss.beta) == std::vector<int>{0, 1});
  const Eigen::VectorXd rg = data.y - data.Z * gauss.alpha - data.X * gauss.beta;
  const double expected_var = std::max({rg.squaredNorm() / 80.0, 1e-6 * sd * sd, 1e-8});
  CHECK(std::abs(gauss.sigma - expected_var) < 1e-12);
}
