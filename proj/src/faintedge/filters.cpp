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

#include "faintedge/filters.hpp"

#include <cmath>
#include <deque>
#include <numbers>

namespace faintedge {

SobelResponse sobel(const GrayImage& img) {
  if (img.height < 3 || img.width < 3)
    throw GeometryError("sobel: image must be at least 3x3, got " + std::to_string(img.height) +
                        "x" + std::to_string(img.width));
  static constexpr double kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  SobelResponse r{GrayImage(img.height, img.width), GrayImage(img.height, img.width)};
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double sx = 0.0, sy = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy < 0 || yy >= img.height || xx < 0 || xx >= img.width) continue;
          const double v = img.at(yy, xx);
          sx += kx[dy + 1][dx + 1] * v;
          sy += kx[dx + 1][dy + 1] * v;
        }
      }
      r.gx.at(y, x) = sx;
      r.gy.at(y, x) = sy;
    }
  }
  return r;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw ContractError("gaussian sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += k[static_cast<std::size_t>(i + radius)];
  }
  for (double& v : k) v /= total;
  return k;
}

namespace {

// Index into [0, n) under half-sample symmetric extension (d c b a | a b c d).
int reflect(int i, int n) {
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

}  // namespace

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  GrayImage tmp(img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[static_cast<std::size_t>(i + r)] * img.at(y, reflect(x + i, img.width));
      tmp.at(y, x) = s;
    }
  GrayImage out(img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[static_cast<std::size_t>(i + r)] * tmp.at(reflect(y + i, img.height), x);
      out.at(y, x) = s;
    }
  return out;
}

GrayImage canny_magnitude(const GrayImage& img, double sigma) {
  const auto g = sobel(gaussian_blur(img, sigma));
  GrayImage mag(img.height, img.width);
  for (std::size_t i = 0; i < mag.size(); ++i) mag.pixels[i] = std::hypot(g.gx.pixels[i], g.gy.pixels[i]);
  return mag;
}

BinaryMask canny(const GrayImage& img, const CannyParams& params) {
  if (!(params.low >= 0.0) || params.low > params.high)
    throw ContractError("canny: thresholds must satisfy 0 <= low <= high");
  const auto g = sobel(gaussian_blur(img, params.sigma));
  const int H = img.height, W = img.width;
  GrayImage mag(H, W);
  for (int y = 1; y < H - 1; ++y)
    for (int x = 1; x < W - 1; ++x) mag.at(y, x) = std::hypot(g.gx.at(y, x), g.gy.at(y, x));

  // Mirrored pixels of a symmetric edge differ only by rounding; comparisons
  // treat values this close as equal so ties resolve by position.
  auto tol = [](double a, double b) { return 1e-9 * (1.0 + std::max(std::abs(a), std::abs(b))); };

  GrayImage thin(H, W);
  for (int y = 1; y < H - 1; ++y) {
    for (int x = 1; x < W - 1; ++x) {
      const double m = mag.at(y, x);
      if (m <= 0.0) continue;
      double angle = std::atan2(g.gy.at(y, x), g.gx.at(y, x)) * 180.0 / std::numbers::pi;
      if (angle < 0.0) angle += 180.0;
      int dx, dy;
      if (angle < 22.5 || angle >= 157.5) { dx = 1; dy = 0; }
      else if (angle < 67.5) { dx = 1; dy = 1; }
      else if (angle < 112.5) { dx = 0; dy = 1; }
      else { dx = -1; dy = 1; }
      if (g.gx.at(y, x) * dx + g.gy.at(y, x) * dy < 0.0) {
        dx = -dx;
        dy = -dy;
      }
      // Strictly above the brighter-side neighbour, at least the darker one:
      // on a symmetric step the pixel on the bright side wins.
      const double uphill = mag.at(y + dy, x + dx);
      const double downhill = mag.at(y - dy, x - dx);
      if (m > uphill + tol(m, uphill) && m >= downhill - tol(m, downhill)) thin.at(y, x) = m;
    }
  }

  BinaryMask out(H, W);
  std::deque<std::pair<int, int>> queue;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      if (thin.at(y, x) >= params.high && thin.at(y, x) > 0.0) {
        out.at(y, x) = 1;
        queue.emplace_back(y, x);
      }
  while (!queue.empty()) {
    auto [y, x] = queue.front();
    queue.pop_front();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int yy = y + dy, xx = x + dx;
        if (yy < 0 || yy >= H || xx < 0 || xx >= W || out.at(yy, xx)) continue;
        const double v = thin.at(yy, xx);
        if (v > 0.0 && v >= params.low) {
          out.at(yy, xx) = 1;
          queue.emplace_back(yy, xx);
        }
      }
  }
  return out;
}

}  // namespace faintedge
