#include "ssq/cli_commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ssq/baselines.hpp"
#include "ssq/csv.hpp"
#include "ssq/data.hpp"
#include "ssq/em_ssqlasso.hpp"
#include "ssq/metrics.hpp"
#include "ssq/replicate.hpp"
#include "ssq/rng.hpp"
#include "ssq/simgen.hpp"
#include "ssq/tuning.hpp"

namespace ssq {

namespace {

// Keys every command accepts from the shared flags without consuming them.
bool is_common_key(const std::string& key) {
  return key == "data" || key == "seed" || key == "out" || key == "threads" ||
         key == "tau" || key == "method";
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += ",";
    out += parts[i];
  }
  return out;
}

std::string join_doubles(const std::vector<double>& values) {
  std::vector<std::string> parts;
  parts.reserve(values.size());
  for (double v : values) parts.push_back(format_double(v));
  return join(parts);
}

// Reads settings from the merged config while recording every resolved
// value, defaults included, so the echoed config reproduces the run exactly.
// finish() rejects leftover keys, which catches misspelled names.
class Settings {
 public:
  explicit Settings(const KeyValueConfig& cfg, std::string command)
      : cfg_(cfg) {
    used_["command"] = std::move(command);
  }

  std::string str(const std::string& key, const std::string& fallback) {
    return note(key, cfg_.get_str(key, fallback));
  }

  std::string require(const std::string& key) {
    if (!cfg_.has(key)) {
      throw UsageError("missing required setting '" + key + "'");
    }
    return note(key, cfg_.get_str(key, ""));
  }

  double num(const std::string& key, double fallback) {
    double v = cfg_.get_double(key, fallback);
    note(key, format_double(v));
    return v;
  }

  double require_num(const std::string& key) {
    if (!cfg_.has(key)) {
      throw UsageError("missing required setting '" + key + "'");
    }
    return num(key, 0.0);
  }

  int integer(const std::string& key, int fallback) {
    int v = cfg_.get_int(key, fallback);
    note(key, std::to_string(v));
    return v;
  }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
    std::uint64_t v = cfg_.get_u64(key, fallback);
    note(key, std::to_string(v));
    return v;
  }

  bool flag(const std::string& key, bool fallback) {
    bool v = cfg_.get_bool(key, fallback);
    note(key, v ? "true" : "false");
    return v;
  }

  std::vector<double> num_list(const std::string& key, const std::vector<double>& fallback) {
    std::vector<double> v = cfg_.get_double_list(key, fallback);
    note(key, join_doubles(v));
    return v;
  }

  std::vector<std::string> str_list(const std::string& key,
                                    const std::vector<std::string>& fallback) {
    std::vector<std::string> v = cfg_.get_str_list(key, fallback);
    note(key, join(v));
    return v;
  }

  bool has(const std::string& key) const { return cfg_.has(key); }

  void finish() const {
    for (const auto& [key, value] : cfg_.entries()) {
      (void)value;
      if (used_.count(key) == 0 && !is_common_key(key)) {
        throw UsageError("unknown setting '" + key + "' for command '" +
                         used_.at("command") + "'");
      }
    }
  }

  std::string echo() const {
    std::string out;
    for (const auto& [key, value] : used_) {
      out += key + "=" + value + "\n";
    }
    return out;
  }

 private:
  std::string note(const std::string& key, std::string value) {
    used_[key] = value;
    return used_[key];
  }

  const KeyValueConfig& cfg_;
  std::map<std::string, std::string> used_;
};

// Converts any settings-assembly failure (bad names, unusable values,
// inconsistent combinations) into a UsageError for the exit-code contract.
template <typename Fn>
auto settings_phase(Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

std::filesystem::path prepare_out_dir(Settings& settings) {
  std::filesystem::path out(settings.str("out", "."));
  std::filesystem::create_directories(out);
  return out;
}

void write_resolved_config(const std::filesystem::path& out, const Settings& settings) {
  write_text_file((out / "resolved_config.txt").string(), settings.echo());
}

double read_tau(Settings& settings) {
  double tau = settings.num("tau", 0.5);
  if (!(tau > 0.0 && tau < 1.0)) {
    throw UsageError("tau must lie strictly between 0 and 1");
  }
  return tau;
}

EmSettings read_em(Settings& settings, bool with_sigma_prior) {
  EmSettings em;
  em.v_k = settings.num("v_k", em.v_k);
  if (with_sigma_prior) {
    em.a = settings.num("a", em.a);
    em.b = settings.num("b", em.b);
  }
  em.delta = settings.num("delta", em.delta);
  em.max_iter = settings.integer("max_iter", em.max_iter);
  em.standardize = settings.flag("standardize", em.standardize);
  return em;
}

SsqlassoConfig make_ssqlasso_config(double tau, double s0, double s1, const EmSettings& em) {
  SsqlassoConfig cfg(QuantileLevel(tau), s0, s1);
  cfg.v_k = em.v_k;
  cfg.a = em.a;
  cfg.b = em.b;
  cfg.delta = em.delta;
  cfg.max_iter = em.max_iter;
  cfg.standardize = em.standardize;
  return cfg;
}

SslassoConfig make_sslasso_config(double s0, double s1, const EmSettings& em) {
  SslassoConfig cfg(s0, s1);
  cfg.v_k = em.v_k;
  cfg.delta = em.delta;
  cfg.max_iter = em.max_iter;
  cfg.standardize = em.standardize;
  return cfg;
}

// Scenario keys shared by simulate and replicate.
ScenarioSpec read_scenario(Settings& settings) {
  ScenarioSpec scenario;
  scenario.n = settings.integer("n", 200);
  scenario.p = settings.integer("p", 400);
  if (scenario.n < 2 || scenario.p < 1) {
    throw UsageError("scenario requires n >= 2 and p >= 1");
  }

  std::string corr = settings.str("corr", "ar1");
  double rho = settings.num("rho", 0.5);
  if (corr == "ar1") {
    scenario.corr = CorrelationSpec::ar1(rho);
  } else if (corr == "banded") {
    scenario.corr = CorrelationSpec::banded(rho);
  } else {
    throw UsageError("unknown correlation kind '" + corr +
                     "' (expected ar1 or banded; custom matrices are library-only)");
  }

  std::string model = settings.str("model", "homogeneous");
  if (model == "homogeneous") {
    scenario.model.kind = ModelSpec::Kind::Homogeneous;
  } else if (model == "heterogeneous") {
    scenario.model.kind = ModelSpec::Kind::Heterogeneous;
  } else {
    throw UsageError("unknown model kind '" + model +
                     "' (expected homogeneous or heterogeneous)");
  }

  if (settings.has("coeffs")) {
    scenario.model.coeff =
        CoefficientSpec::explicit_values(settings.num_list("coeffs", {}));
  } else {
    int signals = settings.integer("signals", 15);
    bool mixed = settings.flag("sign_mix", false);
    scenario.model.coeff = mixed ? CoefficientSpec::mixed_sign(signals)
                                 : CoefficientSpec::uniform_positive(signals);
  }
  scenario.model.intercept = settings.num("intercept", 2.0);

  int clinical_q = settings.integer("clinical_q", 0);
  if (clinical_q < 0) {
    throw UsageError("clinical_q must be >= 0");
  }
  if (clinical_q > 0) {
    ClinicalSpec clinical;
    clinical.q = clinical_q;
    clinical.alpha = settings.num_list("clinical_alpha", {});
    if (!clinical.alpha.empty() &&
        static_cast<int>(clinical.alpha.size()) != clinical_q) {
      throw UsageError("clinical_alpha must list exactly clinical_q values");
    }
    scenario.model.clinical = clinical;
  }
  return scenario;
}

TuningGrid read_grid(Settings& settings) {
  double s0_min = settings.num("s0_min", 1e-3);
  double s0_max = settings.num("s0_max", 0.5);
  int s0_count = settings.integer("s0_count", 20);
  TuningGrid grid;
  grid.s0_values = geometric_grid(s0_min, s0_max, s0_count);
  grid.s1_values = settings.num_list("s1_list", {1.0, 2.0, 4.0});
  return grid;
}

Dataset load_dataset(const std::string& path) { return read_dataset_csv(path); }

// beta.csv, alpha.csv and summary.json for one fitted model. `extra` lands
// in the summary verbatim; a non-finite SIC is serialized as a string.
void write_fit_outputs(const std::filesystem::path& out, const Dataset& data,
                       const FitResult& fit, double tau, const std::string& method,
                       const nlohmann::json& extra) {
  write_beta_csv((out / "beta.csv").string(), fit.beta, fit.eta);
  write_alpha_csv((out / "alpha.csv").string(), fit.alpha);

  double sic_value = sic(data, fit, QuantileLevel(tau));
  nlohmann::json summary;
  summary["method"] = method;
  summary["tau"] = tau;
  summary["n"] = static_cast<long long>(data.n());
  summary["p"] = static_cast<long long>(data.p());
  summary["sigma"] = fit.sigma;
  summary["theta"] = fit.theta;
  summary["iterations"] = fit.iterations;
  summary["converged"] = fit.converged;
  summary["selected_count"] = static_cast<long long>(fit.selected.size());
  if (std::isfinite(sic_value)) {
    summary["sic"] = sic_value;
  } else {
    summary["sic"] = format_double(sic_value);
  }
  for (const auto& [key, value] : extra.items()) {
    summary[key] = value;
  }
  write_text_file((out / "summary.json").string(), summary.dump(2) + "\n");
}

std::string sanitize_message(std::string message) {
  for (char& c : message) {
    if (c == ',') c = ';';
    if (c == '\n' || c == '\r') c = ' ';
  }
  return message;
}

}  // namespace

int cmd_simulate(const KeyValueConfig& cfg) {
  struct Plan {
    Settings settings;
    ScenarioSpec scenario;
    ErrorSpec error;
    std::uint64_t seed;
  };
  Plan plan = settings_phase([&] {
    Settings settings(cfg, "simulate");
    Plan p{settings, {}, {ErrorFamily::Normal1, 0.5}, 1};
    Settings& s = p.settings;
    p.scenario = read_scenario(s);
    p.error.family = parse_error_family(s.str("error", "normal"));
    p.error.tau = read_tau(s);
    p.seed = s.u64("seed", 1);
    s.finish();
    return p;
  });

  std::filesystem::path out = prepare_out_dir(plan.settings);
  write_resolved_config(out, plan.settings);

  Rng rng(plan.seed);
  GeneratedData gen = gen_dataset(plan.scenario.n, plan.scenario.p, plan.scenario.corr,
                                  plan.scenario.model, plan.error, rng);
  write_dataset_csv((out / "data.csv").string(), gen.data);
  write_truth_csv((out / "truth.csv").string(), gen.alpha_true, gen.beta_true);
  return 0;
}

int cmd_fit(const KeyValueConfig& cfg) {
  struct Plan {
    Settings settings;
    std::string data_path;
    Method method;
    double tau;
    EmSettings em;
    double s0, s1;        // EM methods
    bool lasso_init;      // EM methods: start from lasso_warm_start
    LassoConfig lasso;    // plain LASSO
  };
  Plan plan = settings_phase([&] {
    Settings settings(cfg, "fit");
    Plan p{settings, "", Method::Ssqlasso, 0.5, {}, 0.0, 0.0, true, {}};
    Settings& s = p.settings;
    p.data_path = s.require("data");
    p.method = parse_method(s.str("method", "ssqlasso"));
    p.tau = read_tau(s);
    if (p.method == Method::Lasso) {
      p.lasso.lambda = s.require_num("lambda");
      p.lasso.tol = s.num("tol", p.lasso.tol);
      p.lasso.max_iter = s.integer("max_iter", p.lasso.max_iter);
      if (p.lasso.lambda < 0.0) {
        throw UsageError("lambda must be >= 0");
      }
    } else {
      p.em = read_em(s, p.method == Method::Ssqlasso);
      p.s0 = s.num("s0", 0.02);
      p.s1 = s.num("s1", 2.0);
      const std::string init = s.str("init", "lasso");
      if (init != "lasso" && init != "zero") {
        throw UsageError("init must be lasso or zero");
      }
      p.lasso_init = init == "lasso";
    }
    s.finish();
    return p;
  });

  std::filesystem::path out = prepare_out_dir(plan.settings);
  write_resolved_config(out, plan.settings);

  Dataset data = load_dataset(plan.data_path);
  FitResult fit_result;
  switch (plan.method) {
    case Method::Ssqlasso: {
      WarmStart init;
      if (plan.lasso_init) {
        init = lasso_warm_start(data, QuantileLevel(plan.tau));
      }
      fit_result = fit(data, make_ssqlasso_config(plan.tau, plan.s0, plan.s1, plan.em),
                       plan.lasso_init ? &init : nullptr);
      break;
    }
    case Method::Sslasso: {
      WarmStart init;
      if (plan.lasso_init) {
        init = lasso_warm_start(data);
      }
      fit_result = fit_sslasso(data, make_sslasso_config(plan.s0, plan.s1, plan.em),
                               plan.lasso_init ? &init : nullptr);
      break;
    }
    case Method::Lasso:
      fit_result = fit_lasso(data, plan.lasso);
      break;
  }
  write_fit_outputs(out, data, fit_result, plan.tau, method_name(plan.method),
                    nlohmann::json::object());
  return 0;
}

int cmd_tune(const KeyValueConfig& cfg) {
  struct Plan {
    Settings settings;
    std::string data_path;
    Method method;
    std::string mode;
    int folds;
    TuningGrid grid;
    double tau;
    EmSettings em;
    std::uint64_t seed;
  };
  Plan plan = settings_phase([&] {
    Settings settings(cfg, "tune");
    Plan p{settings, "", Method::Ssqlasso, "sic", 5, {}, 0.5, {}, 1};
    Settings& s = p.settings;
    p.data_path = s.require("data");
    p.method = parse_method(s.str("method", "ssqlasso"));
    if (p.method == Method::Lasso) {
      throw UsageError("tune supports ssqlasso and sslasso; use 'path' for the LASSO");
    }
    p.mode = s.str("mode", "sic");
    if (p.mode != "sic" && p.mode != "cv") {
      throw UsageError("unknown tuning mode '" + p.mode + "' (expected sic or cv)");
    }
    p.folds = s.integer("folds", 5);
    p.grid = read_grid(s);
    p.tau = read_tau(s);
    p.em = read_em(s, p.method == Method::Ssqlasso);
    p.seed = s.u64("seed", 1);
    s.finish();
    return p;
  });

  std::filesystem::path out = prepare_out_dir(plan.settings);
  write_resolved_config(out, plan.settings);

  Dataset data = load_dataset(plan.data_path);
  TuningSurface surface;
  if (plan.method == Method::Ssqlasso) {
    SsqlassoConfig base = make_ssqlasso_config(plan.tau, plan.grid.s0_values.front(),
                                               plan.grid.s1_values.back(), plan.em);
    if (plan.mode == "sic") {
      surface = grid_search_sic(data, plan.grid, base);
    } else {
      Rng rng(plan.seed);
      surface = cv_check_loss(data, plan.grid, plan.folds, rng, base);
    }
  } else {
    // The Gaussian baseline has no SIC analogue here; both modes run
    // squared-error cross validation.
    SslassoConfig base = make_sslasso_config(plan.grid.s0_values.front(),
                                             plan.grid.s1_values.back(), plan.em);
    Rng rng(plan.seed);
    surface = cv_squared_error_sslasso(data, plan.grid, plan.folds, rng, base);
  }

  std::ostringstream surface_csv;
  surface_csv << "s0,s1,score\n";
  for (std::size_t j = 0; j < surface.grid.s1_values.size(); ++j) {
    for (std::size_t i = 0; i < surface.grid.s0_values.size(); ++i) {
      double score = surface.score(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (std::isnan(score)) continue;
      surface_csv << format_double(surface.grid.s0_values[i]) << ","
                  << format_double(surface.grid.s1_values[j]) << ","
                  << format_double(score) << "\n";
    }
  }
  write_text_file((out / "surface.csv").string(), surface_csv.str());

  nlohmann::json extra;
  extra["mode"] = plan.mode;
  extra["best_s0"] = surface.best_s0();
  extra["best_s1"] = surface.best_s1();
  extra["best_score"] = surface.score(surface.best_s0_index, surface.best_s1_index);
  if (plan.mode == "cv" || plan.method == Method::Sslasso) {
    extra["folds"] = plan.folds;
  }
  write_fit_outputs(out, data, surface.best_fit, plan.tau, method_name(plan.method), extra);
  return 0;
}

int cmd_path(const KeyValueConfig& cfg) {
  struct Plan {
    Settings settings;
    std::string data_path;
    Method method;
    double tau;
    EmSettings em;
    double s1;
    std::vector<double> s0_grid;   // ascending
    int lambda_count;
    double lambda_min_ratio;
    LassoConfig lasso;
  };
  Plan plan = settings_phase([&] {
    Settings settings(cfg, "path");
    Plan p{settings, "", Method::Ssqlasso, 0.5, {}, 1.0, {}, 100, 1e-3, {}};
    Settings& s = p.settings;
    p.data_path = s.require("data");
    p.method = parse_method(s.str("method", "ssqlasso"));
    if (p.method == Method::Sslasso) {
      throw UsageError("path supports ssqlasso and lasso");
    }
    if (p.method == Method::Ssqlasso) {
      p.tau = read_tau(s);
      p.em = read_em(s, true);
      p.s1 = s.num("s1", 1.0);
      double s0_min = s.num("s0_min", 1e-3);
      double s0_max = s.num("s0_max", p.s1 / 2.0);
      int s0_count = s.integer("s0_count", 50);
      p.s0_grid = geometric_grid(s0_min, s0_max, s0_count);
      if (p.s0_grid.back() >= p.s1) {
        throw UsageError("s0 grid must stay below s1");
      }
    } else {
      p.lambda_count = s.integer("lambda_count", 100);
      p.lambda_min_ratio = s.num("lambda_min_ratio", 1e-3);
      if (p.lambda_count < 2 || !(p.lambda_min_ratio > 0.0) || p.lambda_min_ratio >= 1.0) {
        throw UsageError("lambda_count must be >= 2 and lambda_min_ratio in (0, 1)");
      }
      p.lasso.tol = s.num("tol", p.lasso.tol);
      p.lasso.max_iter = s.integer("max_iter", p.lasso.max_iter);
    }
    s.finish();
    return p;
  });

  std::filesystem::path out = prepare_out_dir(plan.settings);
  write_resolved_config(out, plan.settings);

  Dataset data = load_dataset(plan.data_path);
  if (plan.method == Method::Ssqlasso) {
    SsqlassoConfig base =
        make_ssqlasso_config(plan.tau, plan.s0_grid.front(), plan.s1, plan.em);
    Eigen::MatrixXd coeffs = ssqlasso_path(data, plan.s1, plan.s0_grid, base);
    write_path_csv((out / "path.csv").string(), plan.s0_grid, coeffs);
  } else {
    double lmax = lasso_lambda_max(data);
    std::vector<double> grid =
        geometric_grid(plan.lambda_min_ratio * lmax, lmax, plan.lambda_count);
    std::reverse(grid.begin(), grid.end());
    Eigen::MatrixXd coeffs = lasso_path(data, grid, plan.lasso);
    write_path_csv((out / "path.csv").string(), grid, coeffs);
  }
  return 0;
}

int cmd_replicate(const KeyValueConfig& cfg) {
  struct Plan {
    Settings settings;
    ReplicationPlan replication;
  };
  Plan plan = settings_phase([&] {
    Settings settings(cfg, "replicate");
    Plan p{settings, {}};
    Settings& s = p.settings;
    ReplicationPlan& r = p.replication;

    r.scenario = read_scenario(s);

    r.methods.clear();
    for (const std::string& name : s.str_list("methods", {"ssqlasso"})) {
      r.methods.push_back(parse_method(name));
    }
    r.taus = s.num_list("taus", {0.5});
    for (double tau : r.taus) {
      if (!(tau > 0.0 && tau < 1.0)) {
        throw UsageError("every tau must lie strictly between 0 and 1");
      }
    }
    r.errors.clear();
    for (const std::string& name : s.str_list("errors", {"normal"})) {
      r.errors.push_back(parse_error_family(name));
    }
    if (r.methods.empty() || r.taus.empty() || r.errors.empty()) {
      throw UsageError("methods, taus and errors must be nonempty");
    }

    std::string mode = s.str("mode", "sic");
    if (mode == "sic") {
      r.tuning.mode = TuningSpec::Mode::Sic;
    } else if (mode == "cv") {
      r.tuning.mode = TuningSpec::Mode::Cv;
    } else if (mode == "fixed") {
      r.tuning.mode = TuningSpec::Mode::Fixed;
    } else {
      throw UsageError("unknown tuning mode '" + mode + "' (expected sic, cv or fixed)");
    }
    if (r.tuning.mode == TuningSpec::Mode::Fixed) {
      r.tuning.s0 = s.num("s0", r.tuning.s0);
      r.tuning.s1 = s.num("s1", r.tuning.s1);
    } else {
      r.tuning.grid = read_grid(s);
      r.tuning.cv_folds = s.integer("folds", r.tuning.cv_folds);
    }
    r.em = read_em(s, true);

    r.replicates = s.integer("replicates", 30);
    if (r.replicates < 1) {
      throw UsageError("replicates must be >= 1");
    }
    r.base_seed = s.u64("seed", 1);
    r.threads = s.integer("threads", 1);
    if (r.threads < 1) {
      throw UsageError("threads must be >= 1");
    }
    s.finish();
    return p;
  });

  std::filesystem::path out = prepare_out_dir(plan.settings);
  write_resolved_config(out, plan.settings);

  ReplicationResult result = run_replication(plan.replication);

  std::ostringstream raw;
  raw << "method,tau,error,replicate,tp,fp,fn,tn,f1,mcc,est,ok,message\n";
  for (const ReplicateRecord& rec : result.records) {
    raw << method_name(rec.method) << "," << format_double(rec.tau) << ","
        << error_family_name(rec.error) << "," << rec.replicate << "," << rec.tp << ","
        << rec.fp << "," << rec.fn << "," << rec.tn << "," << format_double(rec.f1)
        << "," << format_double(rec.mcc) << "," << format_double(rec.est) << ","
        << (rec.ok ? "true" : "false") << "," << sanitize_message(rec.message) << "\n";
  }
  write_text_file((out / "replicates.csv").string(), raw.str());

  std::ostringstream agg;
  agg << "method,tau,error,tp_mean,tp_sd,fp_mean,fp_sd,f1_mean,f1_sd,"
         "mcc_mean,mcc_sd,est_mean,est_sd\n";
  for (const AggregateRow& row : result.table) {
    agg << method_name(row.method) << "," << format_double(row.tau) << ","
        << error_family_name(row.error) << "," << format_double(row.tp.mean) << ","
        << format_double(row.tp.sd) << "," << format_double(row.fp.mean) << ","
        << format_double(row.fp.sd) << "," << format_double(row.f1.mean) << ","
        << format_double(row.f1.sd) << "," << format_double(row.mcc.mean) << ","
        << format_double(row.mcc.sd) << "," << format_double(row.est.mean) << ","
        << format_double(row.est.sd) << "\n";
  }
  write_text_file((out / "aggregate.csv").string(), agg.str());
  return 0;
}

}  // namespace ssq
