#ifndef DISSIPAIR_COMMANDS_HPP
#define DISSIPAIR_COMMANDS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dissipair/config.hpp"
#include "dissipair/output_files.hpp"

namespace dissipair {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUnstable = 2,
  kExitNonUnique = 3,
  kExitConfig = 4,
};

int exit_code_for(ErrorCode code);

struct CommandOptions {
  std::string command;
  std::string config_path;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  bool expect_unstable = false;
};

const std::vector<std::string>& command_names();

/// Thread count from --threads, then DISSIPAIR_THREADS, then 1.
int resolve_threads(const std::optional<int>& flag);

/// Runs one subcommand and returns the files it would write, without
/// touching the filesystem. Throws Error on failure.
OutputSet run_command(const std::string& command, const RunConfig& config, int threads, bool expect_unstable = false);

/// Full CLI flow: load config, run, commit outputs, map errors to exit
/// codes. Diagnostics go to stderr.
int execute(const CommandOptions& options);

/// git-describe style version baked in at configure time.
std::string version_string();

}  // namespace dissipair

#endif  // DISSIPAIR_COMMANDS_HPP
