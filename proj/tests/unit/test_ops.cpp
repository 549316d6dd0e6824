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

#include "faintedge/gradcheck.hpp"
#include "faintedge/ops.hpp"
#include "test_util.hpp"

using namespace faintedge;
using fe_test::random_tensor;

namespace {

Tensor delta_kernel(std::int64_t channels, DType dtype) {
  Tensor k = Tensor::zeros(Shape(channels, channels, 3, 3), dtype);
  for (std::int64_t c = 0; c < channels; ++c) k.mutable_buffer().set(static_cast<std::size_t>((c * channels + c) * 9 + 4), 1.0);
  return k;
}

GradCheckReport check_unary(Tensor (*op)(const Tensor&), Tensor x, std::uint64_t seed,
                            GradCheckOptions options = {}) {
  const Tensor w = random_tensor(x.shape(), seed + 1000);
  return grad_check([&](const std::vector<Tensor>& in) { return sum(mul(op(in[0]), w)); }, {x}, options);
}

}  // namespace

TEST(Conv2d, AllOnesCounts) {
  Tensor x = Tensor::full(Shape(1, 1, 3, 3), 1.0, DType::f64);
  Tensor k = Tensor::full(Shape(1, 1, 3, 3), 1.0, DType::f64);
  Tensor y = conv2d(x, k, Tensor::zeros(Shape(1, 1, 1, 1), DType::f64), 1, 1);
  EXPECT_EQ(y.at(0, 0, 1, 1), 9.0);
  EXPECT_EQ(y.at(0, 0, 0, 0), 4.0);
  EXPECT_EQ(y.at(0, 0, 2, 2), 4.0);
  EXPECT_EQ(y.at(0, 0, 0, 1), 6.0);
}

TEST(Conv2d, DeltaKernelIsIdentity) {
  for (DType dt : {DType::f32, DType::f64}) {
    Tensor x = random_tensor(Shape(2, 3, 7, 5), 3, -1, 1, dt);
    Tensor y = conv2d(x, delta_kernel(3, dt), Tensor(), 1, 1);
    EXPECT_TRUE(fe_test::bitwise_equal(x, y));
  }
}

TEST(Conv2d, MatchesReferenceBitwiseInF64) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (auto [stride, pad] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{1, 0}}) {
      Tensor x = random_tensor(Shape(2, 3, 9, 9), seed);
      Tensor w = random_tensor(Shape(4, 3, 3, 3), seed + 10);
      Tensor b = random_tensor(Shape(1, 1, 1, 4), seed + 20);
      EXPECT_TRUE(fe_test::bitwise_equal(conv2d(x, w, b, stride, pad), conv2d_reference(x, w, b, stride, pad)));
    }
  }
}

TEST(Conv2d, MatchesReferenceInF32) {
  Tensor x = random_tensor(Shape(1, 16, 40, 40), 1, -1, 1, DType::f32);
  Tensor w = random_tensor(Shape(8, 16, 3, 3), 2, -1, 1, DType::f32);
  Tensor b = random_tensor(Shape(1, 1, 1, 8), 3, -1, 1, DType::f32);
  const auto fast = conv2d(x, w, b, 1, 1).to_vector();
  const auto ref = conv2d_reference(x, w, b, 1, 1).to_vector();
  for (std::size_t i = 0; i < fast.size(); ++i)
    EXPECT_LE(std::abs(fast[i] - ref[i]), 1e-5 * std::max(1.0, std::abs(ref[i])));
}

TEST(Conv2d, ShapeErrors) {
  Tensor x = random_tensor(Shape(1, 3, 8, 8), 1);
  EXPECT_THROW(conv2d(x, random_tensor(Shape(4, 2, 3, 3), 2), Tensor(), 1, 1), DimensionError);
  EXPECT_THROW(conv2d(x, random_tensor(Shape(4, 3, 3, 3), 2), random_tensor(Shape(1, 1, 1, 3), 3), 1, 1),
               DimensionError);
  EXPECT_THROW(conv2d(x, random_tensor(Shape(4, 3, 3, 3), 2), Tensor(), 2, 1), GeometryError);
  try {
    conv2d(x, random_tensor(Shape(4, 2, 3, 3), 2), Tensor(), 1, 1);
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("[1,3,8,8]"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("[4,2,3,3]"), std::string::npos);
  }
}

TEST(Conv2d, GradCheckTight) {
  Tensor x = random_tensor(Shape(2, 3, 8, 8), 5);
  Tensor w = random_tensor(Shape(4, 3, 3, 3), 6);
  Tensor b = random_tensor(Shape(1, 1, 1, 4), 7);
  const Tensor r = random_tensor(Shape(2, 4, 8, 8), 8);
  GradCheckOptions o;
  o.tolerance = 1e-6;
  auto rep = grad_check([&](const std::vector<Tensor>& in) { return sum(mul(conv2d(in[0], in[1], in[2], 1, 1), r)); },
                        {x, w, b}, o, {"x", "w", "b"});
  EXPECT_TRUE(rep.passed()) << rep.summary();
}

TEST(Relu, Values) {
  Tensor y = relu(Tensor::from_values(Shape(1, 1, 1, 3), {-1.0, 0.0, 2.0}, DType::f64));
  EXPECT_EQ(y.to_vector(), (std::vector<double>{0.0, 0.0, 2.0}));
}

TEST(Relu, AllNegativeGivesZeroGradient) {
  Tensor x = random_tensor(Shape(1, 2, 3, 3), 1, -2.0, -0.1).set_requires_grad(true);
  Tensor y = relu(x);
  for (double v : y.to_vector()) EXPECT_EQ(v, 0.0);
  sum(y).backward();
  for (double g : x.grad_vector()) EXPECT_EQ(g, 0.0);
}

TEST(Relu, GradCheckAwayFromKink) {
  Tensor x = random_tensor(Shape(2, 3, 6, 6), 2);
  const auto values = x.to_vector();
  GradCheckOptions o;
  o.tolerance = 1e-6;
  o.skip = [&](std::size_t, std::size_t i) { return std::abs(values[i]) < 1e-3; };
  auto rep = check_unary(relu, x, 2, o);
  EXPECT_TRUE(rep.passed()) << rep.summary();
}

TEST(Sigmoid, RangeAndGradient) {
  Tensor x = Tensor::from_values(Shape(1, 1, 1, 4), {-800.0, -1.0, 0.0, 800.0}, DType::f64);
  const auto y = sigmoid(x).to_vector();
  EXPECT_EQ(y[2], 0.5);
  EXPECT_GE(y[0], 0.0);
  EXPECT_LE(y[3], 1.0);
  for (double v : y) EXPECT_FALSE(std::isnan(v));
  GradCheckOptions o;
  o.tolerance = 1e-6;
  auto rep = check_unary(sigmoid, random_tensor(Shape(1, 2, 4, 4), 3, -5, 5), 3, o);
  EXPECT_TRUE(rep.passed()) << rep.summary();
}

TEST(MaxPool2, ValuesAndGradient) {
  Tensor x = Tensor::from_values(Shape(1, 1, 2, 2), {1.0, 2.0, 3.0, 4.0}, DType::f64).set_requires_grad(true);
  Tensor y = maxpool2(x);
  EXPECT_EQ(y.item(), 4.0);
  sum(y).backward();
  EXPECT_EQ(x.grad_vector(), (std::vector<double>{0, 0, 0, 1}));
}

TEST(MaxPool2, TiesGoToTopLeft) {
  Tensor x = Tensor::full(Shape(1, 1, 2, 2), 5.0, DType::f64).set_requires_grad(true);
  Tensor y = maxpool2(x);
  EXPECT_EQ(y.item(), 5.0);
  sum(y).backward();
  EXPECT_EQ(x.grad_vector(), (std::vector<double>{1, 0, 0, 0}));
}

TEST(MaxPool2, OneNonzeroPerBlockAtArgmax) {
  Tensor x = random_tensor(Shape(2, 3, 6, 8), 4).set_requires_grad(true);
  const Tensor r = random_tensor(Shape(2, 3, 3, 4), 5, 0.5, 1.0);
  sum(mul(maxpool2(x), r)).backward();
  const auto g = x.grad_vector();
  for (std::int64_t nc = 0; nc < 6; ++nc)
    for (int by = 0; by < 3; ++by)
      for (int bx = 0; bx < 4; ++bx) {
        int nonzero = 0;
        double best = -1e9;
        std::size_t arg = 0, at_nonzero = 0;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const std::size_t i = static_cast<std::size_t>(nc * 48 + (2 * by + dy) * 8 + 2 * bx + dx);
            if (g[i] != 0.0) ++nonzero, at_nonzero = i;
            const double v = x.to_vector()[i];
            if (v > best) best = v, arg = i;
          }
        EXPECT_EQ(nonzero, 1);
        EXPECT_EQ(at_nonzero, arg);
      }
}

TEST(MaxPool2, OddExtentIsGeometryError) {
  EXPECT_THROW(maxpool2(random_tensor(Shape(1, 1, 3, 4), 1)), GeometryError);
  EXPECT_THROW(maxpool2(random_tensor(Shape(1, 1, 4, 5), 1)), GeometryError);
}

TEST(Upsample2, ConstantsAndSinglePixel) {
  Tensor c = Tensor::full(Shape(1, 2, 3, 5), 0.7, DType::f64);
  Tensor u = upsample2(c);
  EXPECT_TRUE(u.shape() == Shape(1, 2, 6, 10));
  for (double v : u.to_vector()) EXPECT_DOUBLE_EQ(v, 0.7);
  Tensor one = upsample2(Tensor::full(Shape(1, 1, 1, 1), 3.25, DType::f64));
  EXPECT_EQ(one.to_vector(), std::vector<double>(4, 3.25));
}

TEST(Upsample2, AveragePoolingRecoversConstant) {
  Tensor c = Tensor::full(Shape(1, 1, 4, 4), 0.3, DType::f64);
  const auto u = upsample2(c);
  // 2x2 mean pooling of the upsampled map.
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      const double m = (u.at(0, 0, 2 * y, 2 * x) + u.at(0, 0, 2 * y, 2 * x + 1) + u.at(0, 0, 2 * y + 1, 2 * x) +
                        u.at(0, 0, 2 * y + 1, 2 * x + 1)) / 4.0;
      EXPECT_NEAR(m, 0.3, 1e-15);
    }
}

TEST(Upsample2, GradCheck) {
  GradCheckOptions o;
  o.tolerance = 1e-6;
  const Tensor r = random_tensor(Shape(1, 1, 8, 8), 9);
  auto rep = grad_check([&](const std::vector<Tensor>& in) { return sum(mul(upsample2(in[0]), r)); },
                        {random_tensor(Shape(1, 1, 4, 4), 8)}, o);
  EXPECT_TRUE(rep.passed()) << rep.summary();
}

TEST(Concat, ChannelsAndGradients) {
  Tensor a = random_tensor(Shape(1, 512, 2, 2), 1, -1, 1, DType::f32).set_requires_grad(true);
  Tensor b = random_tensor(Shape(1, 256, 2, 2), 2, -1, 1, DType::f32).set_requires_grad(true);
  Tensor c = concat_channels(a, b);
  EXPECT_EQ(c.shape().c(), 768);
  sum(c).backward();
  for (double g : a.grad_vector()) EXPECT_EQ(g, 1.0);
  for (double g : b.grad_vector()) EXPECT_EQ(g, 1.0);
}

TEST(Concat, EmptyChannelIsIdentity) {
  Tensor x = random_tensor(Shape(1, 3, 4, 4), 3);
  Tensor e = Tensor::zeros(Shape(1, 0, 4, 4), DType::f64);
  EXPECT_TRUE(fe_test::bitwise_equal(concat_channels(x, e), x));
}

TEST(Concat, SpatialMismatch) {
  EXPECT_THROW(concat_channels(random_tensor(Shape(1, 1, 4, 4), 1), random_tensor(Shape(1, 1, 4, 2), 2)),
               DimensionError);
  EXPECT_THROW(concat_channels(random_tensor(Shape(2, 1, 4, 4), 1), random_tensor(Shape(1, 1, 4, 4), 2)),
               DimensionError);
}

TEST(Elementwise, ShapeMismatchAndDtypeMismatch) {
  EXPECT_THROW(add(random_tensor(Shape(1, 1, 2, 2), 1), random_tensor(Shape(1, 1, 2, 3), 2)), DimensionError);
  EXPECT_THROW(add(random_tensor(Shape(1, 1, 2, 2), 1), random_tensor(Shape(1, 1, 2, 2), 2, -1, 1, DType::f32)),
               DimensionError);
}

TEST(Elementwise, GradChecks) {
  GradCheckOptions o;
  o.tolerance = 1e-6;
  const Shape s(2, 1, 3, 4);
  const Tensor r = random_tensor(s, 50);
  for (auto kind : {ElementwiseKind::add, ElementwiseKind::sub, ElementwiseKind::mul, ElementwiseKind::div}) {
    Tensor b = random_tensor(s, 52, 0.5, 2.0);
    auto rep = grad_check([&](const std::vector<Tensor>& in) { return sum(mul(elementwise(kind, in[0], in[1]), r)); },
                          {random_tensor(s, 51), b}, o);
    EXPECT_TRUE(rep.passed()) << rep.summary();
  }
  auto rep = grad_check([&](const std::vector<Tensor>& in) { return mean(mul(affine(in[0], -1.7, 0.3), r)); },
                        {random_tensor(s, 53)}, o);
  EXPECT_TRUE(rep.passed()) << rep.summary();
}

TEST(Sum, DoubleAccumulationInF32) {
  Tensor x = Tensor::full(Shape(1, 1, 1000, 1000), 0.1, DType::f32);
  EXPECT_NEAR(sum(x).item(), 1e6 * static_cast<double>(0.1f), 0.01);
}
