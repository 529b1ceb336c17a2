#ifndef BAYESRVM_CLI_MAIN_HPP
#define BAYESRVM_CLI_MAIN_HPP

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "bayesrvm/cli.hpp"

namespace bayesrvm {

// Full command-line entry point: key=value config file first (when given),
// explicit flags override it, then dispatch. Exit codes: 0 success,
// 1 input/config error, 2 numerical error, 3 I/O error.
inline int run_cli(int argc, const char* const* argv) {
  RunConfig cfg;

  // Load --config before binding flags so flags win over file values.
  try {
    for (int i = 1; i < argc; ++i) {
      const std::string arg = argv[i];
      if (arg == "--config" && i + 1 < argc) {
        load_config_file(cfg, argv[i + 1]);
      } else if (arg.rfind("--config=", 0) == 0) {
        load_config_file(cfg, arg.substr(9));
      }
    }
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  CLI::App app{"Bayesian RVM classification trainers and experiment harness"};
  app.require_subcommand(0, 1);
  std::string config_path;
  app.add_option("--config", config_path, "key=value config file (flags override)");
  app.add_option("--seed", cfg.seed, "RNG seed");
  app.add_option("--out-dir", cfg.out_dir, "output directory");
  app.add_option("--n-pos", cfg.sim.n_pos, "simulated positive-class size");
  app.add_option("--n-neg", cfg.sim.n_neg, "simulated negative-class size");
  app.add_option("--dataset", cfg.dataset_path, "training CSV path");
  app.add_option("--test", cfg.test_path, "test CSV path");
  app.add_option("--model", cfg.model_path, "fitted model path");
  app.add_option("--label-column", cfg.label_column, "label column index (-1 = last)");
  app.add_option("--positive-label", cfg.positive_label, "token mapped to +1");
  app.add_option("--delimiter", cfg.delimiter, "CSV delimiter");
  app.add_flag("--header", cfg.header, "skip the first CSV line");
  app.add_flag("--standardize", cfg.standardize, "z-score features before the kernel");
  app.add_option("--algorithm", cfg.algorithm, "original|generic|hierarchical");
  app.add_option("--iterations", cfg.iterations, "iteration budget T");
  app.add_option("--burn-in", cfg.burn_in, "burn-in B");
  app.add_option("--a", cfg.a, "Gamma shape for alpha hyperprior");
  app.add_option("--b", cfg.b, "Gamma rate for alpha hyperprior");
  app.add_option("--c", cfg.c, "Gamma shape for tau^-2 prior");
  app.add_option("--d", cfg.d, "Gamma rate for tau^-2 prior");
  auto* gamma_opt = app.add_option("--gamma", cfg.gamma, "fixed RBF bandwidth");
  auto* gamma_mode_opt =
      app.add_option("--gamma-mode", cfg.gamma_mode, "median|fixed");
  app.add_option("--thin", cfg.thin, "trace storage stride");
  app.add_option("--algorithms", cfg.algorithms, "comma list for experiment");
  app.add_option("--repeats", cfg.repeats, "experiment repeats R");
  app.add_option("--scenarios", cfg.scenarios, "comma list of np:nn sizes");
  app.add_option("--threads", cfg.threads, "repeat-level parallelism (0 = auto)");

  for (const char* name : {"simulate", "train", "evaluate", "experiment"})
    app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (!app.get_subcommands().empty())
    cfg.subcommand = app.get_subcommands().front()->get_name();
  if (gamma_opt->count() > 0 && gamma_mode_opt->count() == 0)
    cfg.gamma_mode = "fixed";

  try {
    run_subcommand(cfg);
    return 0;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const numerical_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace bayesrvm

#endif  // BAYESRVM_CLI_MAIN_HPP
