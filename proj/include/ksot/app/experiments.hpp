#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "ksot/app/config.hpp"

namespace ksot::app {

struct RunOutcome {
  int exit_code = 0;       // 0 ok, 2 solver non-convergence
  std::string status;      // "ok" or "not_converged"
  std::filesystem::path directory;
};

/// Runs a resolved config, writing every output file and manifest.json into
/// <out>/<experiment>-<run id>. Progress lines go to `log`.
RunOutcome run_experiment(const RunConfig& config, std::ostream& log);

}  // namespace ksot::app
