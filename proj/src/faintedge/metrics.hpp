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
#include <span>
#include <vector>

#include "faintedge/image.hpp"

namespace faintedge {

struct EdgeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  double threshold = 0.5;
};

// Pixel-exact F-measure: Y = (y >= threshold) is compared with the labels with
// no tolerance for neighbouring pixels. Empty denominators give a rate of 0.
EdgeScore strict_f_measure(const GrayImage& y, const BinaryMask& labels, double threshold = 0.5);
EdgeScore strict_f_measure(const BinaryMask& detected, const BinaryMask& labels);

struct FSweep {
  EdgeScore best;
  std::vector<EdgeScore> table;
};

// Best F over the thresholds; ties keep the lowest threshold.
FSweep f_sweep(const GrayImage& y, const BinaryMask& labels, std::span<const double> thresholds);

struct Psnr {
  double db = 0.0;
  bool saturated = false;  // identical images; db is +infinity
};

Psnr psnr(const GrayImage& a, const GrayImage& b, double peak = 1.0);

// Mean SSIM over 11x11 Gaussian windows (sigma 1.5) lying fully inside the
// image, C1 = (0.01 L)^2, C2 = (0.03 L)^2 with L = 1.
double ssim(const GrayImage& a, const GrayImage& b);

}  // namespace faintedge
