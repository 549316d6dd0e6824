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

#include "faintedge/metrics.hpp"
#include "test_util.hpp"

using namespace faintedge;

TEST(StrictF, MatchesBruteForceEnumeration) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const BinaryMask det = fe_test::random_mask(16, 16, 2 * seed, 0.1 + 0.004 * seed);
    const BinaryMask lab = fe_test::random_mask(16, 16, 2 * seed + 1, 0.3);
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        if (det.at(y, x) && lab.at(y, x)) ++tp;
        if (det.at(y, x) && !lab.at(y, x)) ++fp;
        if (!det.at(y, x) && lab.at(y, x)) ++fn;
      }
    const EdgeScore s = strict_f_measure(det, lab);
    ASSERT_EQ(s.tp, tp);
    ASSERT_EQ(s.fp, fp);
    ASSERT_EQ(s.fn, fn);
    const double p = tp + fp ? double(tp) / double(tp + fp) : 0.0;
    const double r = tp + fn ? double(tp) / double(tp + fn) : 0.0;
    EXPECT_EQ(s.precision, p);
    EXPECT_EQ(s.recall, r);
    EXPECT_GE(s.f, 0.0);
    EXPECT_LE(s.f, 1.0);
    EXPECT_LE(s.f, std::max(p, r) + 1e-15);
    EXPECT_GE(s.f, std::min(p, r) - 1e-15);
  }
}

TEST(StrictF, HandExample) {
  BinaryMask lab(4, 4), det(4, 4);
  lab.at(1, 1) = 1;
  det.at(1, 1) = 1;
  det.at(2, 2) = 1;
  const EdgeScore s = strict_f_measure(det, lab);
  EXPECT_EQ(s.precision, 0.5);
  EXPECT_EQ(s.recall, 1.0);
  EXPECT_NEAR(s.f, 2.0 / 3.0, 1e-15);
}

TEST(StrictF, NeighbourGetsNoCredit) {
  BinaryMask lab(4, 4), det(4, 4);
  lab.at(1, 1) = 1;
  det.at(1, 2) = 1;
  EXPECT_EQ(strict_f_measure(det, lab).f, 0.0);
  EXPECT_EQ(strict_f_measure(BinaryMask(4, 4), BinaryMask(4, 4)).f, 0.0);
}

TEST(StrictF, ThresholdIsInclusive) {
  GrayImage y(1, 2);
  y.at(0, 0) = 0.5;
  y.at(0, 1) = 0.4999;
  BinaryMask lab(1, 2);
  lab.at(0, 0) = 1;
  EXPECT_EQ(strict_f_measure(y, lab, 0.5).f, 1.0);
  EXPECT_THROW(strict_f_measure(y, lab, 1.5), ContractError);
  EXPECT_THROW(strict_f_measure(y, BinaryMask(2, 2)), DimensionError);
}

TEST(FSweep, SingleThresholdEqualsStrictF) {
  const GrayImage y = fe_test::random_image(12, 12, 3);
  const BinaryMask lab = fe_test::random_mask(12, 12, 4);
  const double t[] = {0.5};
  EXPECT_EQ(f_sweep(y, lab, t).best.f, strict_f_measure(y, lab, 0.5).f);
  const double many[] = {0.9, 0.1, 0.5, 0.3};
  const FSweep s = f_sweep(y, lab, many);
  ASSERT_EQ(s.table.size(), 4u);
  for (const auto& row : s.table) EXPECT_LE(row.f, s.best.f);
  EXPECT_THROW(f_sweep(y, lab, {}), ContractError);
}

TEST(Psnr, AnalyticCases) {
  GrayImage a(8, 8, 0.5), b(8, 8, 0.5 + 1.0 / 255.0);
  EXPECT_NEAR(psnr(a, b).db, 48.1308, 0.01);
  GrayImage c(8, 8, 0.6);
  EXPECT_NEAR(psnr(a, c).db, 20.0, 1e-9);
  const Psnr same = psnr(a, a);
  EXPECT_TRUE(same.saturated);
  EXPECT_TRUE(std::isinf(same.db));
  EXPECT_NEAR(psnr(a, c, 255.0).db - psnr(a, c).db, 20.0 * std::log10(255.0), 1e-9);
}

TEST(Ssim, IdentityAndSymmetry) {
  const GrayImage a = fe_test::random_image(24, 20, 5), b = fe_test::random_image(24, 20, 6);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-9);
  EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-14);
  EXPECT_LT(ssim(a, b), 0.5);
  EXPECT_THROW(ssim(GrayImage(10, 20), GrayImage(10, 20)), GeometryError);
}

TEST(Ssim, ConstantPair) {
  // Zero variances leave the luminance term (2 a b + C1) / (a^2 + b^2 + C1).
  const double c1 = 1e-4;
  const double expected = (2 * 0.3 * 0.5 + c1) / (0.09 + 0.25 + c1);
  EXPECT_NEAR(ssim(GrayImage(16, 16, 0.3), GrayImage(16, 16, 0.5)), expected, 1e-12);
  EXPECT_NEAR(expected, 0.8828, 1e-3);
}

TEST(Ssim, InvertedCheckerboardIsNegative) {
  GrayImage a(16, 16), b(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      a.at(y, x) = (x + y) % 2;
      b.at(y, x) = 1.0 - a.at(y, x);
    }
  EXPECT_LT(ssim(a, b), 0.0);
}
