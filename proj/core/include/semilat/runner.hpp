#pragma once

#include <string>

#include "semilat/config.hpp"

namespace semilat {

struct RunOptions {
  std::string output_dir;  // overrides config output_dir when non-empty
  long long seed = -1;     // overrides config seed when >= 0
  int refine_levels = -1;  // overrides config refine.levels when >= 0
  bool quiet = false;
};

/// Runs a scenario config end to end, writing report.csv, diagnostics.json
/// and (with refinement) convergence.csv into the output directory.
/// Exit codes: 0 success, 1 config error, 2 failed hypothesis, 3 numerical
/// divergence or singular solve.
int run_scenario(const std::string& config_path, const RunOptions& opts = {});
int run_scenario(Config cfg, const RunOptions& opts = {});

}  // namespace semilat
