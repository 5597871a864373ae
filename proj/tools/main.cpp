// ssq: spike-and-slab quantile regression toolkit.
//
// Subcommands: simulate | fit | tune | path | replicate. Settings come from
// an optional key=value config file; flags override file entries, which
// override the SSQ_THREADS environment default. Exit codes: 0 success,
// 1 usage error, 2 data or schema error, 3 numerical failure.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"

#include "ssq/cli_commands.hpp"
#include "ssq/config.hpp"
#include "ssq/csv.hpp"
#include "ssq/errors.hpp"

namespace {

// Flag values stay raw strings; the command layer parses and validates them,
// so file entries and flags go through one code path. Option pointers report
// which flags were actually given.
struct SubCommand {
  CLI::App* cmd = nullptr;
  std::string config_path, seed, out, threads, tau, method, data;
  CLI::Option *o_config = nullptr, *o_seed = nullptr, *o_out = nullptr,
              *o_threads = nullptr, *o_tau = nullptr, *o_method = nullptr,
              *o_data = nullptr;
};

void setup(CLI::App& app, SubCommand& s, const char* name, const char* desc,
           bool with_data) {
  s.cmd = app.add_subcommand(name, desc);
  s.o_config = s.cmd->add_option("--config", s.config_path, "key=value settings file");
  s.o_seed = s.cmd->add_option("--seed", s.seed, "base RNG seed (uint64)");
  s.o_out = s.cmd->add_option("--out", s.out, "output directory (default .)");
  s.o_threads = s.cmd->add_option("--threads", s.threads, "worker threads");
  s.o_tau = s.cmd->add_option("--tau", s.tau, "quantile level in (0, 1)");
  s.o_method = s.cmd->add_option("--method", s.method, "ssqlasso | sslasso | lasso");
  if (with_data) {
    s.o_data = s.cmd->add_option("data", s.data, "input dataset CSV");
  }
}

ssq::KeyValueConfig build_config(const SubCommand& s) {
  ssq::KeyValueConfig cfg;
  if (const char* env = std::getenv("SSQ_THREADS")) {
    cfg.set("threads", env);
  }
  if (s.o_config->count() > 0) {
    try {
      const ssq::KeyValueConfig file = ssq::KeyValueConfig::from_file(s.config_path);
      for (const auto& [key, value] : file.entries()) {
        cfg.set(key, value);
      }
    } catch (const std::exception& e) {
      throw ssq::UsageError(std::string("config file: ") + e.what());
    }
  }
  if (s.o_seed->count() > 0) cfg.set("seed", s.seed);
  if (s.o_out->count() > 0) cfg.set("out", s.out);
  if (s.o_threads->count() > 0) cfg.set("threads", s.threads);
  if (s.o_tau->count() > 0) cfg.set("tau", s.tau);
  if (s.o_method->count() > 0) cfg.set("method", s.method);
  if (s.o_data != nullptr && s.o_data->count() > 0) cfg.set("data", s.data);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spike-and-slab quantile LASSO toolkit"};
  app.require_subcommand(1);

  SubCommand simulate, fit, tune, path, replicate;
  setup(app, simulate, "simulate", "generate a synthetic dataset (data.csv, truth.csv)",
        false);
  setup(app, fit, "fit", "fit one model at fixed tuning (beta.csv, alpha.csv, summary.json)",
        true);
  setup(app, tune, "tune", "score a tuning grid and fit the best cell (surface.csv + fit outputs)",
        true);
  setup(app, path, "path", "coefficient trajectories over a tuning grid (path.csv)", true);
  setup(app, replicate, "replicate",
        "simulation study across methods (replicates.csv, aggregate.csv)", false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (simulate.cmd->parsed()) return ssq::cmd_simulate(build_config(simulate));
    if (fit.cmd->parsed()) return ssq::cmd_fit(build_config(fit));
    if (tune.cmd->parsed()) return ssq::cmd_tune(build_config(tune));
    if (path.cmd->parsed()) return ssq::cmd_path(build_config(path));
    if (replicate.cmd->parsed()) return ssq::cmd_replicate(build_config(replicate));
    std::cerr << "error: no subcommand\n";
    return 1;
  } catch (const ssq::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ssq::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const ssq::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
}
