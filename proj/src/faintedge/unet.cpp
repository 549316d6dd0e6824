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

#include "faintedge/unet.hpp"

#include <cmath>

#include "faintedge/checkpoint.hpp"
#include "faintedge/ops.hpp"
#include "faintedge/rng.hpp"

namespace faintedge {

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "convolution";
    case LayerKind::relu: return "ReLU";
    case LayerKind::maxpool: return "max-pooling";
    case LayerKind::upsample: return "UpSample";
    case LayerKind::concat: return "cat";
    case LayerKind::sigmoid: return "Sigmoid";
  }
  return "?";
}

UNetSpec UNetSpec::make(int in_channels, int base_width) {
  if (in_channels < 1) throw ContractError("in_channels must be >= 1");
  if (base_width < 1) throw ContractError("base_width must be >= 1");
  UNetSpec spec;
  spec.in_channels = in_channels;
  spec.base_width = base_width;
  const int b = base_width;

  auto add = [&](LayerKind kind, int out, std::optional<Kernel> k, int stride, int pad,
                 std::optional<int> cat = std::nullopt) {
    spec.layers.push_back({static_cast<int>(spec.layers.size()) + 1, kind, out, k, stride, pad, cat});
  };
  auto conv_relu = [&](int out) {
    add(LayerKind::conv, out, Kernel{3, 3}, 1, 1);
    add(LayerKind::relu, out, std::nullopt, 1, 0);
  };
  auto pool = [&](int ch) { add(LayerKind::maxpool, ch, Kernel{2, 2}, 2, 0); };
  auto up = [&](int ch) { add(LayerKind::upsample, ch, std::nullopt, 2, 0); };

  // Encoder: rows 1-19.
  conv_relu(b); conv_relu(b); pool(b);
  conv_relu(2 * b); conv_relu(2 * b); pool(2 * b);
  conv_relu(4 * b); conv_relu(4 * b); pool(4 * b);
  conv_relu(8 * b); conv_relu(8 * b);
  // Decoder: rows 20-39, skip sources 14, 9, 4.
  up(8 * b);
  add(LayerKind::concat, 12 * b, std::nullopt, 1, 0, 14);
  conv_relu(4 * b); conv_relu(4 * b);
  up(4 * b);
  add(LayerKind::concat, 6 * b, std::nullopt, 1, 0, 9);
  conv_relu(2 * b); conv_relu(2 * b);
  up(2 * b);
  add(LayerKind::concat, 3 * b, std::nullopt, 1, 0, 4);
  conv_relu(b); conv_relu(b);
  add(LayerKind::conv, 1, Kernel{1, 1}, 1, 0);
  add(LayerKind::sigmoid, 1, std::nullopt, 1, 0);

  int channels = in_channels;
  for (const auto& layer : spec.layers) {
    if (layer.kind == LayerKind::conv) {
      const std::string stem = "conv" + std::to_string(layer.index);
      spec.registry.push_back({stem + ".weight", Shape(layer.out_channels, channels, layer.kernel->height, layer.kernel->width)});
      spec.registry.push_back({stem + ".bias", Shape(1, 1, 1, layer.out_channels)});
    }
    if (layer.kind == LayerKind::concat) {
      const int skip = spec.layers[static_cast<std::size_t>(*layer.concat_with - 1)].out_channels;
      if (channels + skip != layer.out_channels) throw ContractError("inconsistent concat channel count");
    }
    channels = layer.out_channels;
  }
  return spec;
}

Model Model::build(const UNetSpec& spec, std::uint64_t seed, DType dtype) {
  Model model(spec, dtype);
  auto rng = derive_stream(seed, {0x756E6574ull});
  for (const auto& p : spec.registry) {
    Tensor t(p.shape, dtype);
    if (p.name.ends_with(".weight")) {
      const double fan_in = static_cast<double>(p.shape.c() * p.shape.h() * p.shape.w());
      const double bound = std::sqrt(6.0 / fan_in);
      auto& buf = t.mutable_buffer();
      for (std::size_t i = 0; i < buf.size(); ++i) buf.set(i, uniform(rng, -bound, bound));
    }
    t.set_requires_grad(true);
    model.params_.push_back(std::move(t));
  }
  return model;
}

Tensor Model::forward(const Tensor& input) const {
  const auto& s = input.shape();
  if (s.c() != spec_.in_channels)
    throw DimensionError("forward: input " + s.str() + " has " + std::to_string(s.c()) +
                         " channels, model expects " + std::to_string(spec_.in_channels));
  if (s.h() % UNetSpec::kDivisor != 0 || s.w() % UNetSpec::kDivisor != 0 || s.h() == 0 || s.w() == 0)
    throw GeometryError("forward: height and width must be positive and divisible by 8, got " +
                        std::to_string(s.h()) + "x" + std::to_string(s.w()));
  if (input.dtype() != dtype_)
    throw DimensionError(std::string("forward: input dtype ") + to_string(input.dtype()) +
                         " does not match model dtype " + to_string(dtype_));

  std::vector<Tensor> outputs(spec_.layers.size() + 1);
  outputs[0] = has_input_norm() ? affine(input, input_scale_, -input_shift_ * input_scale_) : input;
  std::size_t param = 0;
  for (const auto& layer : spec_.layers) {
    const Tensor& x = outputs[static_cast<std::size_t>(layer.index - 1)];
    Tensor y;
    switch (layer.kind) {
      case LayerKind::conv:
        y = conv2d(x, params_[param], params_[param + 1], layer.stride, layer.pad);
        param += 2;
        break;
      case LayerKind::relu: y = relu(x); break;
      case LayerKind::maxpool: y = maxpool2(x); break;
      case LayerKind::upsample: y = upsample2(x); break;
      case LayerKind::concat: y = concat_channels(x, outputs[static_cast<std::size_t>(*layer.concat_with)]); break;
      case LayerKind::sigmoid: y = sigmoid(x); break;
    }
    outputs[static_cast<std::size_t>(layer.index)] = std::move(y);
  }
  return outputs.back();
}

void Model::set_input_norm(double shift, double scale) {
  if (!std::isfinite(shift) || !std::isfinite(scale) || !(scale > 0.0))
    throw ContractError("input norm needs a finite shift and a positive scale");
  input_shift_ = shift;
  input_scale_ = scale;
}

GrayImage Model::predict(const GrayImage& image) const {
  NoGradGuard guard;
  FlushDenormalsGuard ftz;
  return from_tensor(forward(to_tensor(image, dtype_)));
}

const Tensor& Model::parameter(const std::string& name) const {
  for (std::size_t i = 0; i < spec_.registry.size(); ++i)
    if (spec_.registry[i].name == name) return params_[i];
  throw ContractError("no parameter named '" + name + "'");
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.numel());
  return n;
}

void Model::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

Model Model::clone() const {
  Model copy(spec_, dtype_);
  copy.input_shift_ = input_shift_;
  copy.input_scale_ = input_scale_;
  for (const auto& p : params_) {
    Tensor t = p.detach();
    t.set_requires_grad(p.requires_grad());
    copy.params_.push_back(std::move(t));
  }
  return copy;
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  nlohmann::json meta = {{"version", 1},
                         {"kind", "unet"},
                         {"in_channels", model.spec().in_channels},
                         {"base_width", model.spec().base_width},
                         {"input_shift", model.input_shift()},
                         {"input_scale", model.input_scale()}};
  std::vector<std::pair<std::string, Tensor>> entries;
  for (std::size_t i = 0; i < model.parameters().size(); ++i)
    entries.emplace_back(model.spec().registry[i].name, model.parameters()[i]);
  write_nel(path, std::move(meta), entries);
}

Model load_checkpoint(const std::filesystem::path& path, const UNetSpec& spec) {
  NelFile file = read_nel(path);
  const std::size_t n = std::max(file.entries.size(), spec.registry.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= file.entries.size())
      throw CompatibilityError("checkpoint " + path.string() + " lacks entry " + spec.registry[i].name);
    if (i >= spec.registry.size())
      throw CompatibilityError("checkpoint " + path.string() + " has extra entry " + file.entries[i].first);
    const auto& [name, t] = file.entries[i];
    const auto& want = spec.registry[i];
    if (name != want.name || t.shape() != want.shape)
      throw CompatibilityError("checkpoint entry " + std::to_string(i) + " is " + name + " " +
                               t.shape().str() + ", model expects " + want.name + " " + want.shape.str());
  }
  const DType dtype = file.entries.front().second.dtype();
  Model model = Model::build(spec, 0, dtype);
  try {
    model.set_input_norm(file.metadata.value("input_shift", 0.0), file.metadata.value("input_scale", 1.0));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint input norm is malformed: ") + e.what());
  } catch (const ContractError& e) {
    throw FormatError(std::string("checkpoint input norm is invalid: ") + e.what());
  }
  for (std::size_t i = 0; i < n; ++i) {
    model.parameters()[i] = std::move(file.entries[i].second);
    model.parameters()[i].set_requires_grad(true);
  }
  return model;
}

Model load_checkpoint(const std::filesystem::path& path) {
  NelFile head = read_nel(path);
  int in_channels = 0, base_width = 0;
  try {
    in_channels = head.metadata.at("in_channels").get<int>();
    base_width = head.metadata.at("base_width").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint metadata lacks model geometry: ") + e.what());
  }
  return load_checkpoint(path, UNetSpec::make(in_channels, base_width));
}

}  // namespace faintedge
