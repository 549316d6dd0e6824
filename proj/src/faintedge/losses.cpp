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

#include "faintedge/losses.hpp"

#include "faintedge/ops.hpp"

namespace faintedge {

double LossValue::term(const std::string& name) const {
  for (const auto& t : terms)
    if (t.name == name) return t.value;
  throw ContractError("loss has no term '" + name + "'");
}

namespace {

void require_match(const char* what, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(what) + ": shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  if (a.dtype() != b.dtype()) throw DimensionError(std::string(what) + ": dtype mismatch");
}

}  // namespace

LossValue dice_loss(const Tensor& y, const Tensor& label, const DiceOptions& options) {
  require_match("dice_loss", y, label);
  Tensor overlap = sum(mul(label, y));
  Tensor denom = affine(add(sum(label), sum(y)), 1.0, options.epsilon);
  Tensor value = scale(div(overlap, denom), options.conventional ? -2.0 : -1.0);
  LossValue out{value, {}};
  out.terms.push_back({"dice", 1.0, value.item()});
  return out;
}

LossValue l2_loss(const Tensor& y, const Tensor& target) {
  require_match("l2_loss", y, target);
  Tensor value = mean(square(sub(y, target)));
  LossValue out{value, {}};
  out.terms.push_back({"l2", 1.0, value.item()});
  return out;
}

Tensor sobel_kernels(DType dtype) {
  return Tensor::from_values(Shape(2, 1, 3, 3),
                             {-1, 0, 1, -2, 0, 2, -1, 0, 1,
                              -1, -2, -1, 0, 0, 0, 1, 2, 1},
                             dtype);
}

LossValue edge_preservation_loss(const Tensor& denoised, const Tensor& clean) {
  require_match("edge_preservation_loss", denoised, clean);
  if (denoised.shape().c() != 1)
    throw DimensionError("edge_preservation_loss: expects single-channel images, got " + denoised.shape().str());
  const Tensor kernels = sobel_kernels(denoised.dtype());
  Tensor target;
  {
    NoGradGuard guard;
    target = conv2d(clean.detach(), kernels, Tensor(), 1, 1);
  }
  Tensor response = conv2d(denoised, kernels, Tensor(), 1, 1);
  // Summing both channels and dividing by one channel's element count equals
  // mean_x + mean_y.
  const double per_channel = static_cast<double>(denoised.numel());
  Tensor value = scale(sum(square(sub(response, target))), 1.0 / per_channel);
  LossValue out{value, {}};
  out.terms.push_back({"edge", 1.0, value.item()});
  return out;
}

LossValue combined_denoise_loss(const Tensor& denoised, const Tensor& clean, double lambda_edge) {
  if (!(lambda_edge >= 0.0)) throw ContractError("lambda_edge must be non-negative");
  LossValue l2 = l2_loss(denoised, clean);
  LossValue out;
  if (lambda_edge == 0.0) {
    double edge_value;
    {
      NoGradGuard guard;
      edge_value = edge_preservation_loss(denoised.detach(), clean).scalar();
    }
    out.value = l2.value;
    out.terms = {{"l2", 1.0, l2.scalar()}, {"edge", 0.0, edge_value}};
    return out;
  }
  LossValue edge = edge_preservation_loss(denoised, clean);
  out.value = add(l2.value, scale(edge.value, lambda_edge));
  out.terms = {{"l2", 1.0, l2.scalar()}, {"edge", lambda_edge, edge.scalar()}};
  return out;
}

}  // namespace faintedge
