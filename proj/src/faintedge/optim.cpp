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

#include "faintedge/optim.hpp"

#include <cmath>

#include "faintedge/checkpoint.hpp"

namespace faintedge {

const char* to_string(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "sgd_momentum"; }

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd_momentum" || name == "sgd") return OptimizerKind::sgd_momentum;
  throw ContractError("unknown optimizer '" + name + "' (expected adam or sgd_momentum)");
}

nlohmann::json OptimizerConfig::to_json() const {
  return {{"kind", to_string(kind)}, {"lr", lr},           {"beta1", beta1},
          {"beta2", beta2},          {"epsilon", epsilon}, {"momentum", momentum}};
}

OptimizerConfig OptimizerConfig::from_json(const nlohmann::json& j) {
  OptimizerConfig c;
  c.kind = optimizer_from_string(j.value("kind", std::string("adam")));
  c.lr = j.value("lr", c.lr);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.momentum = j.value("momentum", c.momentum);
  return c;
}

OptimizerState OptimizerState::for_parameters(const std::vector<Tensor>& params) {
  OptimizerState s;
  for (const auto& p : params) {
    s.first.emplace_back(static_cast<std::size_t>(p.numel()), 0.0);
    s.second.emplace_back(static_cast<std::size_t>(p.numel()), 0.0);
  }
  return s;
}

namespace {

void check_aligned(const std::vector<Tensor>& params, const OptimizerState& state) {
  if (state.first.size() != params.size() || state.second.size() != params.size())
    throw DimensionError("optimizer state holds " + std::to_string(state.first.size()) + " buffers for " +
                         std::to_string(params.size()) + " parameters");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (state.first[i].size() != static_cast<std::size_t>(params[i].numel()) ||
        state.second[i].size() != static_cast<std::size_t>(params[i].numel()))
      throw DimensionError("optimizer buffer " + std::to_string(i) + " does not match parameter shape " +
                           params[i].shape().str());
}

// Calls fn(data span, grad span or empty) with the parameter's own scalar type.
template <class Fn>
void with_param(Tensor& p, Fn&& fn) {
  dispatch(p.dtype(), [&]<class T>(TypeTag<T>) {
    auto data = p.mutable_data<T>();
    std::span<const T> grad;
    if (p.has_grad()) grad = p.grad().template as<T>();
    fn(data, grad);
  });
}

}  // namespace

void step_adam(std::vector<Tensor>& params, OptimizerState& state, double lr, double beta1, double beta2,
               double epsilon) {
  check_aligned(params, state);
  state.t += 1;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.first[i];
    auto& v = state.second[i];
    with_param(params[i], [&]<class T>(std::span<T> data, std::span<const T> grad) {
      for (std::size_t k = 0; k < data.size(); ++k) {
        const double g = grad.empty() ? 0.0 : static_cast<double>(grad[k]);
        m[k] = beta1 * m[k] + (1.0 - beta1) * g;
        v[k] = beta2 * v[k] + (1.0 - beta2) * g * g;
        const double mhat = m[k] / c1, vhat = v[k] / c2;
        data[k] = static_cast<T>(static_cast<double>(data[k]) - lr * mhat / (std::sqrt(vhat) + epsilon));
      }
    });
  }
}

void step_sgd_momentum(std::vector<Tensor>& params, OptimizerState& state, double lr, double momentum) {
  check_aligned(params, state);
  state.t += 1;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& vel = state.first[i];
    with_param(params[i], [&]<class T>(std::span<T> data, std::span<const T> grad) {
      for (std::size_t k = 0; k < data.size(); ++k) {
        const double g = grad.empty() ? 0.0 : static_cast<double>(grad[k]);
        vel[k] = momentum * vel[k] + g;
        data[k] = static_cast<T>(static_cast<double>(data[k]) - lr * vel[k]);
      }
    });
  }
}

void optimizer_step(const OptimizerConfig& config, std::vector<Tensor>& params, OptimizerState& state) {
  if (config.kind == OptimizerKind::adam)
    step_adam(params, state, config.lr, config.beta1, config.beta2, config.epsilon);
  else
    step_sgd_momentum(params, state, config.lr, config.momentum);
}

double clip_grad_norm(std::vector<Tensor>& params, double max_norm) {
  double total = 0.0;
  for (const auto& p : params) {
    if (!p.has_grad()) continue;
    const Buffer& g = p.grad();
    for (std::size_t k = 0; k < g.size(); ++k) total += g.get(k) * g.get(k);
  }
  const double norm = std::sqrt(total);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& p : params) {
      if (!p.has_grad()) continue;
      Buffer& g = *p.impl()->grad;
      dispatch(g.dtype(), [&]<class T>(TypeTag<T>) {
        for (T& x : g.as<T>()) x = static_cast<T>(static_cast<double>(x) * factor);
      });
    }
  }
  return norm;
}

void save_optimizer_state(const std::filesystem::path& path, const OptimizerState& state,
                          const std::vector<Tensor>& params, const nlohmann::json& extra) {
  check_aligned(params, state);
  std::vector<std::pair<std::string, Tensor>> entries;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Shape s = params[i].shape();
    entries.emplace_back("first." + std::to_string(i), Tensor::from_values(s, state.first[i], DType::f64));
    entries.emplace_back("second." + std::to_string(i), Tensor::from_values(s, state.second[i], DType::f64));
  }
  nlohmann::json meta = {{"version", 1}, {"kind", "optimizer_state"}, {"t", state.t}, {"extra", extra}};
  write_nel(path, std::move(meta), entries);
}

OptimizerState load_optimizer_state(const std::filesystem::path& path, const std::vector<Tensor>& params,
                                    nlohmann::json* extra) {
  NelFile file = read_nel(path);
  if (file.metadata.value("kind", std::string()) != "optimizer_state")
    throw FormatError(path.string() + " is not an optimizer state file");
  if (file.entries.size() != 2 * params.size())
    throw CompatibilityError("optimizer state has " + std::to_string(file.entries.size() / 2) +
                             " buffers, model has " + std::to_string(params.size()) + " parameters");
  OptimizerState state;
  state.t = file.metadata.at("t").get<std::int64_t>();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& a = file.entries[2 * i].second;
    const Tensor& b = file.entries[2 * i + 1].second;
    if (!(a.shape() == params[i].shape()) || !(b.shape() == params[i].shape()))
      throw CompatibilityError("optimizer buffer " + std::to_string(i) + " has shape " + a.shape().str() +
                               ", parameter has " + params[i].shape().str());
    state.first.push_back(a.to_vector());
    state.second.push_back(b.to_vector());
  }
  if (extra) *extra = file.metadata.value("extra", nlohmann::json::object());
  return state;
}

}  // namespace faintedge
