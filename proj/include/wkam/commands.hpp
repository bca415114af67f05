// Copyright 2026 The wkam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WKAM_COMMANDS_HPP
#define WKAM_COMMANDS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "wkam/error.hpp"

namespace wkam {

/// Process exit codes.
enum ExitCode : int { exit_ok = 0, exit_validation = 1, exit_not_converged = 2, exit_verify_failed = 3 };

/// Name of the environment variable that overrides the output directory.
inline constexpr const char* kOutDirEnv = "WKAM_OUT_DIR";

struct CommandRequest {
  /// cell | sweep | oracle | simulate | verify | report
  std::string command;
  std::optional<std::string> config_path;
  /// Output directory from the command line; wins over the environment and
  /// the config file.
  std::optional<std::string> out_dir;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  bool dump_sigma = false;
  /// Input manifest for `report`.
  std::string manifest_path;
};

struct CommandResult {
  int exit_code = exit_ok;
  std::string out_dir;
  std::string manifest_path;
  std::string message;
};

/// Runs one subcommand. Never throws: failures become exit codes and a
/// message. Progress lines go to `log` when given.
CommandResult run_command(const CommandRequest& request, std::ostream* log = nullptr);

int exit_code_for(ErrorCode code);

}  // namespace wkam

#endif  // WKAM_COMMANDS_HPP
