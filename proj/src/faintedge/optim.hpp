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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "faintedge/tensor.hpp"

namespace faintedge {

enum class OptimizerKind { adam, sgd_momentum };

const char* to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(const std::string& name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double momentum = 0.9;  // sgd_momentum only

  nlohmann::json to_json() const;
  static OptimizerConfig from_json(const nlohmann::json& j);
};

// Moment buffers mirror the parameters element for element and are kept in
// double precision whatever the parameter dtype.
struct OptimizerState {
  std::vector<std::vector<double>> first;   // Adam m, or SGD velocity
  std::vector<std::vector<double>> second;  // Adam v
  std::int64_t t = 0;

  static OptimizerState for_parameters(const std::vector<Tensor>& params);
};

// Bias-corrected Adam. Parameters without a gradient see g = 0.
void step_adam(std::vector<Tensor>& params, OptimizerState& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double epsilon = 1e-8);

// v <- momentum * v + g; p <- p - lr * v.
void step_sgd_momentum(std::vector<Tensor>& params, OptimizerState& state, double lr, double momentum = 0.9);

void optimizer_step(const OptimizerConfig& config, std::vector<Tensor>& params, OptimizerState& state);

// Scales all gradients so that their joint L2 norm is at most max_norm.
// Returns the norm before scaling.
double clip_grad_norm(std::vector<Tensor>& params, double max_norm);

// State file next to a checkpoint; `extra` lands in the metadata verbatim.
void save_optimizer_state(const std::filesystem::path& path, const OptimizerState& state,
                          const std::vector<Tensor>& params, const nlohmann::json& extra);
OptimizerState load_optimizer_state(const std::filesystem::path& path, const std::vector<Tensor>& params,
                                    nlohmann::json* extra = nullptr);

}  // namespace faintedge
