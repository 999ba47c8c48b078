#include <CLI11.hpp>
#include <string>

#include "semilat/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"semilat: positive-semigroup perturbation laboratory"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "run a scenario config and write reports");
  std::string config_path;
  semilat::RunOptions opts;
  run->add_option("config", config_path, "scenario config file")->required();
  run->add_option("--out", opts.output_dir, "output directory (overrides config)");
  run->add_option("--seed", opts.seed, "random seed (overrides config)");
  run->add_option("--refine", opts.refine_levels, "grid refinement levels for convergence.csv");
  run->add_flag("--quiet", opts.quiet, "suppress progress output");

  CLI11_PARSE(app, argc, argv);
  if (run->parsed()) return semilat::run_scenario(config_path, opts);
  return 1;
}
