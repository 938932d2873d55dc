/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace boxmend::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitProvider = 3,
};

/// Runs one command line (without the program name).
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

/// Splices the keys of every `--config FILE` into the argument list right
/// after the subcommand name, so explicit flags (which come later) win.
/// Throws boxmend::Error (SchemaError, ParseError, IoError).
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace boxmend::cli
