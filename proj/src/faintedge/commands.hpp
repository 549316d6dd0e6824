/*
 * Copyright 2026 The faintedge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace faintedge {

struct CommandOutcome {
  nlohmann::json config;  // every option with its effective value
  nlohmann::json result;
};

// Runs one tool command from a JSON object of options. Unknown options raise
// ContractError. Commands: gen-edges, gen-denoise, train, eval, detect,
// denoise, canny, bench, gradcheck, snr-sweep.
CommandOutcome run_command(const std::string& name, const nlohmann::json& options);

std::vector<std::string> command_names();

}  // namespace faintedge
