#pragma once

// Subcommands of the command-line tool. Each writes its outputs and a
// resolved copy of the configuration into cfg.io.out_dir and returns an
// exit code.

#include <functional>
#include <iosfwd>
#include <string>

#include "wvamp/config.hpp"

namespace wvamp {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitNumeric = 3,
  kExitNotConverged = 4,
};

int cmd_lifetime(const RunConfig& cfg, std::ostream& log);
int cmd_pdf(const RunConfig& cfg, std::ostream& log);
int cmd_generate(const RunConfig& cfg, std::ostream& log);
int cmd_fit(const RunConfig& cfg, const std::string& data_path, std::ostream& log);
int cmd_scan(const RunConfig& cfg, std::ostream& log);
int cmd_ensemble(const RunConfig& cfg, std::ostream& log);

/// Runs `body` and maps library errors onto exit codes, reporting to `err`.
int run_guarded(std::ostream& err, const std::function<int()>& body);

}  // namespace wvamp
