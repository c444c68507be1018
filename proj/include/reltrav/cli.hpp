/* Copyright 2026 The reltrav Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef RELTRAV_CLI_HPP_
#define RELTRAV_CLI_HPP_

#include <string>
#include <vector>

namespace reltrav {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point for the `reltrav` tool. args[0] is the program name.
// Subcommands: pairgen, autolabel, synth, train, eval, calibrate, segeval,
// serve, sweep-labels.
int RunCli(const std::vector<std::string>& args);

}  // namespace reltrav

#endif  // RELTRAV_CLI_HPP_
