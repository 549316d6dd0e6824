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

#include "faintedge/tensor.hpp"

namespace faintedge {

struct LossTerm {
  std::string name;
  double weight = 1.0;
  double value = 0.0;
};

// A graph-attached scalar plus the weighted terms it is made of, for logging.
struct LossValue {
  Tensor value;
  std::vector<LossTerm> terms;

  double scalar() const { return value.item(); }
  double term(const std::string& name) const;
};

struct DiceOptions {
  double epsilon = 1e-6;
  // Multiply by 2 to obtain the textbook soft Dice; off keeps the -sum(y'y)/(sum y' + sum y) form.
  bool conventional = false;
};

// -sum(label * y) / (sum(label) + sum(y) + eps), over every element.
LossValue dice_loss(const Tensor& y, const Tensor& label, const DiceOptions& options = {});

// Mean squared difference.
LossValue l2_loss(const Tensor& y, const Tensor& target);

// mean((Sx*d - Sx*c)^2) + mean((Sy*d - Sy*c)^2) with zero-padded Sobel kernels;
// gradients flow into `denoised` only.
LossValue edge_preservation_loss(const Tensor& denoised, const Tensor& clean);

// l2 + lambda_edge * edge. lambda_edge == 0 leaves the edge term out of the graph.
LossValue combined_denoise_loss(const Tensor& denoised, const Tensor& clean, double lambda_edge = 1.0);

// The fixed [2, 1, 3, 3] Sobel bank (x then y) used by the edge loss.
Tensor sobel_kernels(DType dtype);

}  // namespace faintedge
