// Copyright 2026 The deplima Authors.
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

#ifndef DEPLIMA_TOOLS_CLI_H_
#define DEPLIMA_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace deplima::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

inline constexpr char kModelDirEnv[] = "DEPLIMA_MODEL_DIR";

// Runs one invocation. `args` excludes the program name. Data goes to `out`
// (when an output path is "-"), diagnostics and logs to `err`.
int Dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace deplima::cli

#endif  // DEPLIMA_TOOLS_CLI_H_
