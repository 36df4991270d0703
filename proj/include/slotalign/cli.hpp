/*
Copyright 2026 The slotalign Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slotalign::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,       // solver or I/O failure without results
  kConfigError = 2,   // bad flags or option combinations
  kInputError = 3,    // unreadable or inconsistent input files
  kNotConverged = 4,  // hit kmax; results were still written
};

// Entry point shared by the executable and the tests. `args` excludes the
// program name. Subcommands: align, perturb, eval, bench, generate.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace slotalign::cli
