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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "faintedge/ops.hpp"
#include "faintedge/optim.hpp"
#include "test_util.hpp"

using namespace faintedge;

namespace {

Tensor scalar_param(double v) {
  Tensor t = Tensor::from_values(Shape(1, 1, 1, 1), {v}, DType::f64);
  t.set_requires_grad(true);
  return t;
}

// d/dw of sum(w * c) is c.
void set_gradient(Tensor& p, const Tensor& c) {
  p.zero_grad();
  sum(mul(p, c)).backward();
}

}  // namespace

TEST(Adam, HandEvaluatedFirstStep) {
  std::vector<Tensor> params{scalar_param(0.0)};
  set_gradient(params[0], Tensor::from_values(Shape(1, 1, 1, 1), {1.0}, DType::f64));
  auto state = OptimizerState::for_parameters(params);
  step_adam(params, state, 0.1);
  EXPECT_NEAR(params[0].item(), -0.1 / (1.0 + 1e-8), 1e-15);
  EXPECT_EQ(state.t, 1);
}

TEST(Adam, ZeroLearningRateStillUpdatesMoments) {
  std::vector<Tensor> params{fe_test::random_tensor(Shape(1, 1, 2, 3), 1)};
  params[0].set_requires_grad(true);
  const auto before = params[0].to_vector();
  set_gradient(params[0], fe_test::random_tensor(Shape(1, 1, 2, 3), 2));
  auto state = OptimizerState::for_parameters(params);
  step_adam(params, state, 0.0);
  EXPECT_EQ(params[0].to_vector(), before);
  EXPECT_NE(state.first[0][0], 0.0);
  EXPECT_NE(state.second[0][0], 0.0);
}

TEST(Adam, MatchesScalarReference) {
  const Shape s(1, 1, 3, 5);
  std::vector<Tensor> params{fe_test::random_tensor(s, 3), fe_test::random_tensor(Shape(1, 1, 1, 4), 4)};
  for (auto& p : params) p.set_requires_grad(true);
  std::vector<std::vector<double>> w{params[0].to_vector(), params[1].to_vector()};
  std::vector<std::vector<double>> m{std::vector<double>(15), std::vector<double>(4)}, v = m;
  auto state = OptimizerState::for_parameters(params);
  const double lr = 0.01, b1 = 0.8, b2 = 0.99, eps = 1e-7;
  for (int t = 1; t <= 5; ++t) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Tensor c = fe_test::random_tensor(params[i].shape(), 100 * t + i);
      set_gradient(params[i], c);
      const auto g = c.to_vector();
      for (std::size_t k = 0; k < g.size(); ++k) {
        m[i][k] = b1 * m[i][k] + (1 - b1) * g[k];
        v[i][k] = b2 * v[i][k] + (1 - b2) * g[k] * g[k];
        const double mh = m[i][k] / (1 - std::pow(b1, t)), vh = v[i][k] / (1 - std::pow(b2, t));
        w[i][k] -= lr * mh / (std::sqrt(vh) + eps);
      }
    }
    step_adam(params, state, lr, b1, b2, eps);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto got = params[i].to_vector();
      for (std::size_t k = 0; k < got.size(); ++k)
        EXPECT_LE(std::abs(got[k] - w[i][k]), 1e-12 * std::max(1.0, std::abs(w[i][k])));
    }
  }
}

TEST(Adam, DescendsQuadratic) {
  std::vector<Tensor> params{scalar_param(2.0)};
  auto state = OptimizerState::for_parameters(params);
  double prev = 4.0;
  for (int i = 0; i < 100; ++i) {
    params[0].zero_grad();
    Tensor loss = sum(square(params[0]));
    loss.backward();
    step_adam(params, state, 0.01);
    const double now = params[0].item() * params[0].item();
    EXPECT_LT(now, prev);
    prev = now;
  }
}

TEST(Adam, MisalignedStateRejected) {
  std::vector<Tensor> params{scalar_param(1.0)};
  OptimizerState state;
  EXPECT_THROW(step_adam(params, state, 0.1), DimensionError);
}

TEST(Sgd, MomentumUpdate) {
  std::vector<Tensor> params{scalar_param(1.0)};
  auto state = OptimizerState::for_parameters(params);
  const Tensor g = Tensor::from_values(Shape(1, 1, 1, 1), {2.0}, DType::f64);
  set_gradient(params[0], g);
  step_sgd_momentum(params, state, 0.1, 0.5);
  EXPECT_NEAR(params[0].item(), 0.8, 1e-15);
  step_sgd_momentum(params, state, 0.1, 0.5);
  EXPECT_NEAR(params[0].item(), 0.8 - 0.1 * 3.0, 1e-15);
}

TEST(ClipGradNorm, ScalesOnlyAboveLimit) {
  std::vector<Tensor> params{scalar_param(0.0), scalar_param(0.0)};
  set_gradient(params[0], Tensor::from_values(Shape(1, 1, 1, 1), {3.0}, DType::f64));
  set_gradient(params[1], Tensor::from_values(Shape(1, 1, 1, 1), {4.0}, DType::f64));
  EXPECT_DOUBLE_EQ(clip_grad_norm(params, 10.0), 5.0);
  EXPECT_EQ(params[0].grad_vector()[0], 3.0);
  EXPECT_DOUBLE_EQ(clip_grad_norm(params, 1.0), 5.0);
  EXPECT_NEAR(params[0].grad_vector()[0], 0.6, 1e-15);
  EXPECT_NEAR(params[1].grad_vector()[0], 0.8, 1e-15);
}

TEST(OptimizerState, FileRoundTrip) {
  std::vector<Tensor> params{fe_test::random_tensor(Shape(1, 1, 2, 2), 5)};
  params[0].set_requires_grad(true);
  set_gradient(params[0], fe_test::random_tensor(Shape(1, 1, 2, 2), 6));
  auto state = OptimizerState::for_parameters(params);
  step_adam(params, state, 0.1);
  const auto path = std::filesystem::temp_directory_path() / "faintedge_optim_state.nel";
  save_optimizer_state(path, state, params, {{"epoch", 3}});
  nlohmann::json extra;
  const auto back = load_optimizer_state(path, params, &extra);
  EXPECT_EQ(back.t, 1);
  EXPECT_EQ(back.first, state.first);
  EXPECT_EQ(back.second, state.second);
  EXPECT_EQ(extra.at("epoch"), 3);
}

TEST(OptimizerConfig, JsonRoundTrip) {
  OptimizerConfig c;
  c.kind = OptimizerKind::sgd_momentum;
  c.lr = 0.05;
  const auto back = OptimizerConfig::from_json(c.to_json());
  EXPECT_EQ(back.kind, c.kind);
  EXPECT_EQ(back.lr, 0.05);
  EXPECT_THROW(optimizer_from_string("rmsprop"), ContractError);
}
