// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Exit codes: 0 success, 1 configuration or input
// error, 2 task failure.
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace musa {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitTaskFailure = 2;

/// Runs one command. `args` includes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace musa
