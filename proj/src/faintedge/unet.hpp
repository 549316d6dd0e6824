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
#include <optional>
#include <string>
#include <vector>

#include "faintedge/image.hpp"
#include "faintedge/tensor.hpp"

namespace faintedge {

enum class LayerKind { conv, relu, maxpool, upsample, concat, sigmoid };

const char* to_string(LayerKind kind);

struct Kernel {
  int height = 0;
  int width = 0;
  friend bool operator==(const Kernel&, const Kernel&) = default;
};

// One row of the architecture table. For upsample layers `stride` holds the
// scale factor (the table writes it as a fractional stride of 0.5).
struct LayerSpec {
  int index = 0;  // 1-based
  LayerKind kind = LayerKind::conv;
  int out_channels = 0;
  std::optional<Kernel> kernel;
  int stride = 1;
  int pad = 0;
  std::optional<int> concat_with;
};

struct ParamSpec {
  std::string name;
  Shape shape;
};

struct UNetSpec {
  int in_channels = 1;
  int base_width = 64;
  std::vector<LayerSpec> layers;
  std::vector<ParamSpec> registry;

  // The 39-layer encoder/decoder with channels base_width * {1, 2, 4, 8}.
  static UNetSpec make(int in_channels, int base_width);

  // Three 2x poolings: inputs must be divisible by this.
  static constexpr int kDivisor = 8;
};

class Model {
 public:
  // Kaiming-uniform weights (bound sqrt(6 / fan_in)), zero biases.
  static Model build(const UNetSpec& spec, std::uint64_t seed, DType dtype = DType::f32);

  const UNetSpec& spec() const { return spec_; }
  DType dtype() const { return dtype_; }

  // Fixed input map x -> (x - shift) * scale applied before the first conv.
  // Identity (0, 1) for a freshly built model; stored in checkpoints.
  void set_input_norm(double shift, double scale);
  double input_shift() const { return input_shift_; }
  double input_scale() const { return input_scale_; }
  bool has_input_norm() const { return input_shift_ != 0.0 || input_scale_ != 1.0; }

  // N x in_channels x H x W -> N x 1 x H x W in (0, 1).
  Tensor forward(const Tensor& input) const;
  // Inference on one grayscale image, without recording a graph.
  GrayImage predict(const GrayImage& image) const;

  std::vector<Tensor>& parameters() { return params_; }
  const std::vector<Tensor>& parameters() const { return params_; }
  const Tensor& parameter(const std::string& name) const;
  std::size_t parameter_count() const;

  void zero_grad();
  // Deep copy with independent parameter storage.
  Model clone() const;

 private:
  Model(UNetSpec spec, DType dtype) : spec_(std::move(spec)), dtype_(dtype) {}
  UNetSpec spec_;
  DType dtype_;
  double input_shift_ = 0.0;
  double input_scale_ = 1.0;
  std::vector<Tensor> params_;
};

void save_checkpoint(const Model& model, const std::filesystem::path& path);

// Throws CompatibilityError naming the first registry entry that differs.
Model load_checkpoint(const std::filesystem::path& path, const UNetSpec& spec);

// Loads with the spec recorded in the file.
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace faintedge
