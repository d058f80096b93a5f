// Copyright 2026 The qscore Authors
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

/// \file cli.hpp
/// The `qscore` command-line front end, callable in-process.
///
/// Commands: score, divergence, coherence, qfi, bound (one JSON object each)
/// and simulate, advantage (CSV grids), plus replay, which re-executes the
/// configuration echoed in a results file and compares every value bit for
/// bit. Every option can also come from a strict JSON file given with
/// --config; flags given on the command line override the file.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qscore::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  /// replay found a value that differs from the re-executed run.
  kMismatch = 1,
  /// Bad flag, bad configuration value or malformed results file.
  kInvalid = 2,
  kIoError = 3,
};

/// Parse `args` (without the program name) and execute one command. Results
/// go to `out` (or to the --out file), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qscore::cli
