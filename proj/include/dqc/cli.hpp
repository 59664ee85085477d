#pragma once

#include <string>
#include <vector>

namespace dqc {

enum ExitCode : int {
  exit_ok = 0,
  exit_config = 2,
  exit_solver = 3,
  exit_check_failed = 4,
};

/// Entry point of the dqc tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args);

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutputDirEnv = "DQC_OUTPUT_DIR";

}  // namespace dqc
