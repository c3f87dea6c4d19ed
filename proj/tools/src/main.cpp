#include <iostream>

#include <CLI11.hpp>

#include "hjhom_cli/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hjhom: effective Hamiltonians of degenerate viscous Hamilton-Jacobi equations"};
  app.require_subcommand(1, 1);
  hjhom::cli::Options opts;
  std::uint64_t seed = 0;
  double window = 0, tol = 0;
  int threads = 1;

  const char* verbs[][2] = {
      {"validate", "check the environment hypotheses"},
      {"critical-value", "compute the critical value lambda0"},
      {"corrector", "corrector derivative profiles at selected levels"},
      {"curve", "effective Hamiltonian curve"},
      {"verify", "cross-check the curve against the parabolic solver"},
      {"sweep", "per-seed curves plus an aggregate spread table"},
      {"emit", "collect plot-ready CSVs from an artifact directory"},
      {"run", "full pipeline"},
  };
  for (auto& v : verbs) {
    CLI::App* sub = app.add_subcommand(v[0], v[1]);
    sub->add_option("--config", opts.config_path, "config file (hjhom-config/1)")->envname("HJHOM_CONFIG");
    sub->add_option("--seed", seed, "environment seed")->envname("HJHOM_SEED");
    sub->add_option("--window", window, "cell window length")->envname("HJHOM_WINDOW");
    sub->add_option("--threads", threads, "worker cap")->envname("HJHOM_THREADS");
    sub->add_flag("--fresh", opts.fresh, "ignore stage checkpoints")->envname("HJHOM_FRESH");
    sub->add_option("--tol-lambda", tol, "tolerance on lambda")->envname("HJHOM_TOL_LAMBDA");
    sub->add_option("--out", opts.out, "artifact directory")->envname("HJHOM_OUT");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : hjhom::cli::usage_error;
  }
  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed")) opts.seed = seed;
  if (sub->count("--window")) opts.window = window;
  if (sub->count("--threads")) opts.threads = threads;
  if (sub->count("--tol-lambda")) opts.tol_lambda = tol;
  return hjhom::cli::run_verb(sub->get_name(), opts, std::cerr);
}
