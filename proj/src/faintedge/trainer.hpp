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
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "faintedge/datagen.hpp"
#include "faintedge/optim.hpp"
#include "faintedge/unet.hpp"

namespace faintedge {

struct TrainConfig {
  Task task = Task::edges;
  int epochs = 100;
  int batch = 4;
  OptimizerConfig optimizer;
  double lambda_edge = 1.0;  // denoise only; 0 trains with L2 alone
  std::uint64_t seed = 0;
  int eval_every = 1;        // epochs between evaluations; the last epoch is always evaluated
  std::string checkpoint;    // empty: nothing written
  int crop = 128;            // 0 or >= image size: whole images
  double grad_clip = 10.0;   // 0 disables
  bool resample_noise = true;
  bool hflip = false;        // online horizontal flips (edge datasets store their own)
  bool vflip = true;
  std::int64_t max_steps = 0;  // 0: no cap
  double eval_threshold = 0.5;
  // Fit the model's input norm to the train-split mean and std before the
  // first step, unless the model already carries one.
  bool standardize_input = true;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct LogRow {
  int epoch = 0;
  std::int64_t step = 0;
  double loss = kMissing;
  double loss_l2 = kMissing;
  double loss_edge = kMissing;
  double eval_metric = kMissing;
  double wall_ms = 0.0;
};

struct TrainResult {
  std::vector<LogRow> log;
  double best_metric = kMissing;
  int best_epoch = 0;
  OptimizerState optimizer;
};

// epoch,step,loss,loss_l2,loss_edge,eval_metric,wall_ms
std::string log_to_csv(const std::vector<LogRow>& log);

// Called after every epoch; returning false stops training early.
using EpochCallback = std::function<bool(const LogRow&)>;

// Trains `model` in place on the train split and evaluates on the test split
// (strict F at eval_threshold for edges, SSIM for denoise). With a checkpoint
// path, the model is written to <path> after every epoch, to <path>.best at
// each new best metric, and the optimizer state to <path>.state.
TrainResult train(const TrainConfig& config, const Dataset& dataset, Model& model,
                  const EpochCallback& on_epoch = {});

// Sets the input norm to the mean and 1/std of all train-split input pixels.
void fit_input_norm(Model& model, const Dataset& dataset);

// Continues a run from <config.checkpoint> and its .state file, producing the
// log rows of the remaining epochs.
TrainResult resume(const TrainConfig& config, const Dataset& dataset, Model& model,
                   const EpochCallback& on_epoch = {});

// One training batch as assembled by the loop: crops, flips and fresh noise
// are drawn from a stream keyed by (seed, epoch, sample index).
struct Batch {
  Tensor input;
  Tensor target;
};
Batch assemble_batch(const TrainConfig& config, const Dataset& dataset, std::span<const std::size_t> indices,
                     int epoch);

// ---- evaluation ----

struct MetricsRow {
  std::string kind;  // "image" or "mean"
  std::string id;    // sample id, or "snr=<v>"/"sigma=<v>"/"all" for means
  double tag = kMissing;
  std::size_t count = 1;
  // edges
  double precision = kMissing;
  double recall = kMissing;
  double f = kMissing;
  // denoise
  double psnr_noisy = kMissing;
  double psnr = kMissing;
  double ssim = kMissing;
};

struct MetricsReport {
  Task task = Task::edges;
  std::vector<MetricsRow> rows;

  // Mean over all images of F (edges) or SSIM (denoise).
  double primary() const;
  const MetricsRow& overall() const;
  std::string to_csv() const;
};

struct EvalOptions {
  double threshold = 0.5;
  // Edges: average each image over this many fresh noise draws; 0 uses the
  // stored noisy input.
  int redraws = 0;
  std::uint64_t seed = 0;
};

using Predictor = std::function<GrayImage(const GrayImage&)>;

MetricsReport evaluate(const Predictor& predict, const std::vector<const Sample*>& samples, Task task,
                       const EvalOptions& options = {});
MetricsReport evaluate(const Model& model, const std::vector<const Sample*>& samples, Task task,
                       const EvalOptions& options = {});

}  // namespace faintedge
