#include "ssq/replicate.hpp"

#include <atomic>
#include <stdexcept>
#include <thread>

#include "ssq/metrics.hpp"

namespace ssq {

std::string method_name(Method m) {
  switch (m) {
    case Method::Ssqlasso:
      return "ssqlasso";
    case Method::Sslasso:
      return "sslasso";
    case Method::Lasso:
      return "lasso";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "ssqlasso") {
    return Method::Ssqlasso;
  }
  if (name == "sslasso") {
    return Method::Sslasso;
  }
  if (name == "lasso") {
    return Method::Lasso;
  }
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::string error_family_name(ErrorFamily f) {
  switch (f) {
    case ErrorFamily::Normal1:
      return "normal";
    case ErrorFamily::T2:
      return "t2";
    case ErrorFamily::LogNormal1:
      return "lognormal";
    case ErrorFamily::MixtureNormal:
      return "mixture";
    case ErrorFamily::Laplace1:
      return "laplace";
  }
  return "unknown";
}

ErrorFamily parse_error_family(const std::string& name) {
  if (name == "normal") {
    return ErrorFamily::Normal1;
  }
  if (name == "t2") {
    return ErrorFamily::T2;
  }
  if (name == "lognormal") {
    return ErrorFamily::LogNormal1;
  }
  if (name == "mixture") {
    return ErrorFamily::MixtureNormal;
  }
  if (name == "laplace") {
    return ErrorFamily::Laplace1;
  }
  throw std::invalid_argument("unknown error family '" + name + "'");
}

FitResult fit_method(Method method, const Dataset& data, double tau,
                     const TuningSpec& tuning, const EmSettings& em, Rng& rng) {
  switch (method) {
    case Method::Ssqlasso: {
      SsqlassoConfig cfg(QuantileLevel(tau), tuning.s0, std::max(tuning.s1, tuning.s0));
      cfg.v_k = em.v_k;
      cfg.a = em.a;
      cfg.b = em.b;
      cfg.delta = em.delta;
      cfg.max_iter = em.max_iter;
      cfg.standardize = em.standardize;
      if (tuning.mode == TuningSpec::Mode::Fixed) {
        const WarmStart init = lasso_warm_start(data, cfg.tau);
        return fit(data, cfg, &init);
      }
      if (tuning.mode == TuningSpec::Mode::Sic) {
        return grid_search_sic(data, tuning.grid, cfg).best_fit;
      }
      return cv_check_loss(data, tuning.grid, tuning.cv_folds, rng, cfg).best_fit;
    }
    case Method::Sslasso: {
      SslassoConfig cfg(tuning.s0, std::max(tuning.s1, tuning.s0));
      cfg.v_k = em.v_k;
      cfg.delta = em.delta;
      cfg.max_iter = em.max_iter;
      cfg.standardize = em.standardize;
      if (tuning.mode == TuningSpec::Mode::Fixed) {
        const WarmStart init = lasso_warm_start(data);
        return fit_sslasso(data, cfg, &init);
      }
      return cv_squared_error_sslasso(data, tuning.grid, tuning.cv_folds, rng, cfg).best_fit;
    }
    case Method::Lasso: {
      LassoConfig cfg;
      const std::vector<double> grid = default_lambda_grid(data);
      const int best = cv_squared_error_lasso(data, grid, tuning.cv_folds, rng, cfg);
      cfg.lambda = grid[best];
      return fit_lasso(data, cfg);
    }
  }
  throw std::invalid_argument("unknown method");
}

ReplicationResult run_replication(const ReplicationPlan& plan) {
  if (plan.replicates < 1 || plan.methods.empty() || plan.taus.empty() ||
      plan.errors.empty()) {
    throw std::invalid_argument("replication plan needs methods, taus, errors, replicates >= 1");
  }
  const int threads = std::max(1, plan.threads);

  struct Job {
    double tau;
    ErrorFamily error;
    int replicate;
  };
  std::vector<Job> jobs;
  for (const double tau : plan.taus) {
    for (const ErrorFamily error : plan.errors) {
      for (int r = 0; r < plan.replicates; ++r) {
        jobs.push_back({tau, error, r});
      }
    }
  }

  const std::size_t n_methods = plan.methods.size();
  ReplicationResult result;
  result.records.resize(jobs.size() * n_methods);

  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= jobs.size()) {
        return;
      }
      const Job& job = jobs[idx];
      const std::uint64_t seed = plan.base_seed + static_cast<std::uint64_t>(job.replicate);
      Rng rng(seed);
      GeneratedData gen;
      bool data_ok = true;
      std::string data_message;
      try {
        gen = gen_dataset(plan.scenario.n, plan.scenario.p, plan.scenario.corr,
                          plan.scenario.model, {job.error, job.tau}, rng);
      } catch (const std::exception& e) {
        data_ok = false;
        data_message = e.what();
      }
      for (std::size_t m = 0; m < n_methods; ++m) {
        ReplicateRecord& rec = result.records[idx * n_methods + m];
        rec.method = plan.methods[m];
        rec.tau = job.tau;
        rec.error = job.error;
        rec.replicate = job.replicate;
        if (!data_ok) {
          rec.ok = false;
          rec.message = data_message;
          continue;
        }
        try {
          // Separate stream per (replicate, method) for CV fold splits.
          Rng fold_rng(seed ^ (0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(m)));
          const FitResult fitted =
              fit_method(plan.methods[m], gen.data, job.tau, plan.tuning, plan.em, fold_rng);
          const IdentificationReport id =
              identification_metrics(fitted.beta, gen.beta_true);
          rec.tp = id.tp;
          rec.fp = id.fp;
          rec.fn = id.fn;
          rec.tn = id.tn;
          rec.f1 = id.f1;
          rec.mcc = id.mcc;
          rec.est = estimation_error(fitted.beta, gen.beta_true);
          rec.ok = true;
        } catch (const std::exception& e) {
          rec.ok = false;
          rec.message = e.what();
        }
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
    for (auto& t : pool) {
      t.join();
    }
  }

  for (const Method method : plan.methods) {
    for (const double tau : plan.taus) {
      for (const ErrorFamily error : plan.errors) {
        std::vector<double> tp, fp, f1, mcc, est;
        for (const ReplicateRecord& rec : result.records) {
          if (rec.method == method && rec.tau == tau && rec.error == error && rec.ok) {
            tp.push_back(rec.tp);
            fp.push_back(rec.fp);
            f1.push_back(rec.f1);
            mcc.push_back(rec.mcc);
            est.push_back(rec.est);
          }
        }
        AggregateRow row;
        row.method = method;
        row.tau = tau;
        row.error = error;
        row.n_ok = static_cast<int>(tp.size());
        row.tp = mean_sd(tp);
        row.fp = mean_sd(fp);
        row.f1 = mean_sd(f1);
        row.mcc = mean_sd(mcc);
        row.est = mean_sd(est);
        result.table.push_back(row);
      }
    }
  }
  return result;
}

}  // namespace ssq
