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
#include <string>
#include <vector>

#include "faintedge/filters.hpp"
#include "faintedge/gradcheck.hpp"
#include "faintedge/trainer.hpp"
#include "faintedge/unet.hpp"

namespace faintedge {

struct GradSuiteOptions {
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  double step = 1e-5;
  double tolerance = 1e-5;
  bool include_unet = true;
  int unet_width = 4;
  int unet_size = 16;
  double unet_tolerance = 1e-4;
  std::size_t unet_entries_per_tensor = 64;
  // Below this the central difference cannot resolve the U-Net tolerance.
  double unet_min_abs_gradient = 1e-6;
};

struct GradSuiteCase {
  std::string name;  // "<op>/seed=<s>"
  GradCheckReport report;
};

struct GradSuiteResult {
  std::vector<GradSuiteCase> cases;
  bool passed() const;
  std::string to_csv() const;  // case,input,checked,max_rel_error,passed
};

// Finite-difference checks of every differentiable op, the three losses and,
// optionally, a reduced U-Net trained with Dice loss.
GradSuiteResult gradcheck_suite(const GradSuiteOptions& options = {});

struct SweepRow {
  double snr = 0.0;
  std::string method;  // "model" or "canny"
  double f_mean = 0.0;
  double f_std = 0.0;  // population standard deviation over iterations
};

struct SweepOptions {
  std::vector<double> snrs{1.0, 1.2, 1.4, 1.6, 1.8, 2.0};
  int iterations = 100;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  CannyParams canny;
};

// Strict F of the model and of Canny on fresh noise draws of `pattern`,
// scored against the Canny labels of the clean pattern. Both methods see the
// same noisy image in each iteration.
std::vector<SweepRow> snr_sweep(const Predictor& model, const GrayImage& pattern, const SweepOptions& options);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);
std::string sweep_to_svg(const std::vector<SweepRow>& rows);

struct BenchRow {
  int size = 0;
  double median_ms = 0.0;
};

// Batch-1 forward passes on size x size noise; one warm-up pass per size is
// discarded. Image loading and saving are not timed.
std::vector<BenchRow> bench_forward(const Model& model, const std::vector<int>& sizes, int repeat,
                                    std::uint64_t seed = 0);
std::string bench_to_csv(const std::vector<BenchRow>& rows);

}  // namespace faintedge
