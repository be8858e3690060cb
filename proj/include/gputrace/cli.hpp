// SPDX-FileCopyrightText: Copyright (c) 2026 The gputrace authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gputrace::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kEnvironmentError = 3,
};

/// Entry point of the `gputrace` tool. `args` excludes the program name.
/// Data goes to `out` (or files), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gputrace::cli
