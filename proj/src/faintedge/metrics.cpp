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

#include "faintedge/metrics.hpp"

#include <cmath>
#include <limits>

namespace faintedge {
namespace {

template <class A, class B>
void require_same_size(const char* what, const A& a, const B& b) {
  if (a.height != b.height || a.width != b.width)
    throw DimensionError(std::string(what) + ": size mismatch " + std::to_string(a.height) + "x" +
                         std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                         std::to_string(b.width));
}

EdgeScore score_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, double threshold) {
  EdgeScore s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  s.threshold = threshold;
  s.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  s.f = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

}  // namespace

EdgeScore strict_f_measure(const GrayImage& y, const BinaryMask& labels, double threshold) {
  require_same_size("strict_f_measure", y, labels);
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ContractError("threshold must lie in [0, 1]");
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const bool det = y.pixels[i] >= threshold;
    const bool lab = labels.pixels[i] != 0;
    tp += det && lab;
    fp += det && !lab;
    fn += !det && lab;
  }
  return score_from_counts(tp, fp, fn, threshold);
}

EdgeScore strict_f_measure(const BinaryMask& detected, const BinaryMask& labels) {
  return strict_f_measure(to_gray(detected), labels, 0.5);
}

FSweep f_sweep(const GrayImage& y, const BinaryMask& labels, std::span<const double> thresholds) {
  if (thresholds.empty()) throw ContractError("f_sweep: empty threshold list");
  FSweep out;
  for (double t : thresholds) {
    out.table.push_back(strict_f_measure(y, labels, t));
    const auto& s = out.table.back();
    if (out.table.size() == 1 || s.f > out.best.f || (s.f == out.best.f && t < out.best.threshold))
      out.best = s;
  }
  return out;
}

Psnr psnr(const GrayImage& a, const GrayImage& b, double peak) {
  require_same_size("psnr", a, b);
  if (!(peak > 0.0)) throw ContractError("psnr: peak must be positive");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.pixels[i] - b.pixels[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.size());
  if (mse == 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {10.0 * std::log10(peak * peak / mse), false};
}

double ssim(const GrayImage& a, const GrayImage& b) {
  require_same_size("ssim", a, b);
  constexpr int kWin = 11;
  if (a.height < kWin || a.width < kWin) throw GeometryError("ssim: images must be at least 11x11");
  constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;

  double w1[kWin];
  double total = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - kWin / 2;
    w1[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    total += w1[i];
  }
  for (double& v : w1) v /= total;

  const int oh = a.height - kWin + 1, ow = a.width - kWin + 1;
  // Separable weighted sums of a, b, a^2, b^2, ab: horizontal pass first.
  const int H = a.height;
  std::vector<double> rows(static_cast<std::size_t>(5) * H * ow);
  auto row = [&](int k, int y, int x) -> double& { return rows[(static_cast<std::size_t>(k) * H + y) * ow + x]; };
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < ow; ++x) {
      double s[5] = {};
      for (int i = 0; i < kWin; ++i) {
        const double va = a.at(y, x + i), vb = b.at(y, x + i), w = w1[i];
        s[0] += w * va;
        s[1] += w * vb;
        s[2] += w * va * va;
        s[3] += w * vb * vb;
        s[4] += w * va * vb;
      }
      for (int k = 0; k < 5; ++k) row(k, y, x) = s[k];
    }

  double acc = 0.0;
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s[5] = {};
      for (int i = 0; i < kWin; ++i)
        for (int k = 0; k < 5; ++k) s[k] += w1[i] * row(k, y + i, x);
      const double mu_a = s[0], mu_b = s[1];
      const double var_a = s[2] - mu_a * mu_a;
      const double var_b = s[3] - mu_b * mu_b;
      const double cov = s[4] - mu_a * mu_b;
      acc += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
             ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
    }
  return acc / (static_cast<double>(oh) * ow);
}

}  // namespace faintedge
