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

#include <vector>

#include "faintedge/image.hpp"

namespace faintedge {

struct SobelResponse {
  GrayImage gx;
  GrayImage gy;
};

// 3x3 Sobel correlation with zero padding:
//   gx = [[-1,0,1],[-2,0,2],[-1,0,1]], gy = transpose(gx).
// gy is positive where intensity grows with the row index.
SobelResponse sobel(const GrayImage& img);

// Normalized 1-D Gaussian taps, radius ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

// Separable Gaussian with symmetric (edge-repeating) reflection at borders,
// which keeps the total mass of the image unchanged.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

struct CannyParams {
  double low = 0.1;
  double high = 0.2;
  double sigma = 1.0;
};

// Gaussian -> Sobel -> magnitude -> 4-direction non-maximum suppression ->
// 8-connected hysteresis. The one-pixel image frame never carries an edge.
// Where two pixels straddle a step with equal magnitude, the brighter one is kept.
BinaryMask canny(const GrayImage& img, const CannyParams& params = {});

// Gradient magnitude after smoothing, as seen by canny() before suppression.
GrayImage canny_magnitude(const GrayImage& img, double sigma);

}  // namespace faintedge
