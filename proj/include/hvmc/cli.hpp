// Copyright 2026 The Handover VMC Authors
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

// `hvmc` command line: run, batch, metrics, serve.
//
// Exit codes: 0 ok, 2 task failure, 3 system error, 4 invalid input.
// Every flag can also be set through an HVMC_ environment variable, for
// example HVMC_CHAIN, HVMC_CONTROLLER_CONFIG, HVMC_SEED.

#ifndef HVMC_CLI_HPP_
#define HVMC_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "hvmc/scenario.hpp"

namespace hvmc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitTaskFailure = 2;
inline constexpr int kExitSystem = 3;
inline constexpr int kExitInvalid = 4;

// args excludes the program name.
int main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err);

// One row per run, fixed column order.
void write_outcomes_csv(const std::vector<RunOutcome>& outcomes,
                        std::ostream& out);

}  // namespace hvmc::cli

#endif  // HVMC_CLI_HPP_
