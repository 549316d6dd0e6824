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

#include "faintedge/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "faintedge/losses.hpp"
#include "faintedge/metrics.hpp"
#include "faintedge/report.hpp"
#include "faintedge/rng.hpp"

namespace faintedge {

namespace {
constexpr std::uint64_t kEpochKey = 0xE90C;
constexpr std::uint64_t kSampleKey = 0x5A3B1E;
constexpr std::uint64_t kRedrawKey = 0x4ED4A3;
}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ContractError("epochs must be >= 1, got " + std::to_string(epochs));
  if (batch < 1) throw ContractError("batch must be >= 1, got " + std::to_string(batch));
  if (crop < 0 || crop % UNetSpec::kDivisor != 0)
    throw GeometryError("crop must be a non-negative multiple of 8, got " + std::to_string(crop));
  if (eval_every < 1) throw ContractError("eval_every must be >= 1");
  if (!(lambda_edge >= 0.0)) throw ContractError("lambda_edge must be >= 0");
  if (!(optimizer.lr >= 0.0)) throw ContractError("learning rate must be >= 0");
  if (!(grad_clip >= 0.0)) throw ContractError("grad_clip must be >= 0");
  if (max_steps < 0) throw ContractError("max_steps must be >= 0");
  if (!(eval_threshold >= 0.0 && eval_threshold <= 1.0)) throw ContractError("eval threshold must lie in [0, 1]");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"task", to_string(task)},
          {"epochs", epochs},
          {"batch", batch},
          {"optimizer", optimizer.to_json()},
          {"lambda_edge", lambda_edge},
          {"seed", seed},
          {"eval_every", eval_every},
          {"checkpoint", checkpoint},
          {"crop", crop},
          {"grad_clip", grad_clip},
          {"resample_noise", resample_noise},
          {"hflip", hflip},
          {"vflip", vflip},
          {"max_steps", max_steps},
          {"eval_threshold", eval_threshold},
          {"standardize_input", standardize_input}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.task = task_from_string(j.value("task", std::string("edges")));
  c.epochs = j.value("epochs", c.epochs);
  c.batch = j.value("batch", c.batch);
  if (j.contains("optimizer")) c.optimizer = OptimizerConfig::from_json(j.at("optimizer"));
  c.lambda_edge = j.value("lambda_edge", c.lambda_edge);
  c.seed = j.value("seed", c.seed);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.checkpoint = j.value("checkpoint", c.checkpoint);
  c.crop = j.value("crop", c.crop);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.resample_noise = j.value("resample_noise", c.resample_noise);
  c.hflip = j.value("hflip", c.hflip);
  c.vflip = j.value("vflip", c.vflip);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.eval_threshold = j.value("eval_threshold", c.eval_threshold);
  c.standardize_input = j.value("standardize_input", c.standardize_input);
  return c;
}

std::string log_to_csv(const std::vector<LogRow>& log) {
  std::string out = "epoch,step,loss,loss_l2,loss_edge,eval_metric,wall_ms\n";
  for (const auto& r : log)
    out += csv_line({std::to_string(r.epoch), std::to_string(r.step), format_number(r.loss),
                     format_number(r.loss_l2), format_number(r.loss_edge), format_number(r.eval_metric),
                     format_number(r.wall_ms)});
  return out;
}

Batch assemble_batch(const TrainConfig& config, const Dataset& dataset, std::span<const std::size_t> indices,
                     int epoch) {
  if (indices.empty()) throw ContractError("assemble_batch: empty batch");
  const Task task = dataset.manifest.task;
  std::vector<GrayImage> inputs, targets;
  for (std::size_t idx : indices) {
    const Sample& s = dataset.samples.at(idx);
    auto rng = derive_stream(config.seed, {kSampleKey, static_cast<std::uint64_t>(epoch), idx});
    const int H = s.input.height, W = s.input.width;
    const int ch = config.crop > 0 && config.crop < H ? config.crop : H;
    const int cw = config.crop > 0 && config.crop < W ? config.crop : W;
    const int y0 = ch < H ? uniform_int(rng, 0, H - ch) : 0;
    const int x0 = cw < W ? uniform_int(rng, 0, W - cw) : 0;
    const bool hf = config.hflip && uniform01(rng) < 0.5;
    const bool vf = config.vflip && uniform01(rng) < 0.5;

    GrayImage clean = crop(s.clean, y0, x0, ch, cw);
    GrayImage input;
    if (config.resample_noise)
      input = task == Task::edges ? apply_noise_model(clean, s.tag, rng) : add_gaussian_noise(clean, s.tag, rng);
    else
      input = crop(s.input, y0, x0, ch, cw);
    GrayImage target = task == Task::edges ? to_gray(crop(s.label, y0, x0, ch, cw)) : clean;
    if (hf) input = faintedge::hflip(input), target = faintedge::hflip(target);
    if (vf) input = faintedge::vflip(input), target = faintedge::vflip(target);
    inputs.push_back(std::move(input));
    targets.push_back(std::move(target));
  }
  return {to_tensor(inputs, DType::f32), to_tensor(targets, DType::f32)};
}

namespace {

struct RunState {
  int next_epoch = 1;
  std::int64_t step = 0;
  double best_metric = kMissing;
  int best_epoch = 0;
  OptimizerState optimizer;
};

std::filesystem::path suffixed(const std::string& path, const char* suffix) { return path + suffix; }

TrainResult run(const TrainConfig& config, const Dataset& dataset, Model& model, RunState state,
                const EpochCallback& on_epoch) {
  config.validate();
  FlushDenormalsGuard ftz;
  if (dataset.manifest.task != config.task)
    throw ContractError(std::string("dataset holds ") + to_string(dataset.manifest.task) +
                        " samples but the config trains " + to_string(config.task));
  if (model.spec().in_channels != 1)
    throw CompatibilityError("training expects a single-channel model, got in_channels=" +
                             std::to_string(model.spec().in_channels));
  std::vector<std::size_t> train_idx;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i)
    if (dataset.samples[i].split == Split::train) train_idx.push_back(i);
  if (train_idx.empty()) throw ContractError("training split is empty");
  const auto test = dataset.split(Split::test);

  // Parameters are trained in their own dtype; batches are converted to it.
  auto convert = [&](const Tensor& t) {
    if (t.dtype() == model.dtype()) return t;
    return Tensor::from_values(t.shape(), t.to_vector(), model.dtype());
  };

  TrainResult result;
  result.best_metric = state.best_metric;
  result.best_epoch = state.best_epoch;
  auto& params = model.parameters();

  for (int epoch = state.next_epoch; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    auto order = train_idx;
    auto rng = derive_stream(config.seed, {kEpochKey, static_cast<std::uint64_t>(epoch)});
    for (std::size_t i = order.size() - 1; i > 0; --i)
      std::swap(order[i], order[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(i)))]);

    double loss_sum = 0.0, l2_sum = 0.0, edge_sum = 0.0;
    std::size_t batches = 0;
    bool capped = false;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(config.batch)) {
      if (config.max_steps > 0 && state.step >= config.max_steps) {
        capped = true;
        break;
      }
      const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(config.batch));
      Batch batch = assemble_batch(config, dataset, std::span(order).subspan(b, e - b), epoch);
      model.zero_grad();
      Tensor y = model.forward(convert(batch.input));
      const Tensor target = convert(batch.target);
      LossValue loss = config.task == Task::edges ? dice_loss(y, target)
                                                  : combined_denoise_loss(y, target, config.lambda_edge);
      const double value = loss.scalar();
      if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << ", batch " << batches + 1 << ": loss=" << value;
        for (const auto& t : loss.terms) msg << ", " << t.name << "=" << t.value;
        throw NumericError(msg.str());
      }
      loss.value.backward();
      if (config.grad_clip > 0.0) clip_grad_norm(params, config.grad_clip);
      optimizer_step(config.optimizer, params, state.optimizer);
      ++state.step;
      ++batches;
      loss_sum += value;
      if (config.task == Task::denoise) {
        l2_sum += loss.term("l2");
        edge_sum += loss.term("edge");
      }
    }

    LogRow row;
    row.epoch = epoch;
    row.step = state.step;
    if (batches > 0) {
      row.loss = loss_sum / static_cast<double>(batches);
      if (config.task == Task::denoise) {
        row.loss_l2 = l2_sum / static_cast<double>(batches);
        row.loss_edge = edge_sum / static_cast<double>(batches);
      }
    }
    const bool last = epoch == config.epochs || capped;
    if (!test.empty() && (epoch % config.eval_every == 0 || last)) {
      row.eval_metric = evaluate(model, test, config.task, {config.eval_threshold, 0, config.seed}).primary();
      if (std::isnan(result.best_metric) || row.eval_metric > result.best_metric) {
        result.best_metric = row.eval_metric;
        result.best_epoch = epoch;
        if (!config.checkpoint.empty()) save_checkpoint(model, suffixed(config.checkpoint, ".best"));
      }
    }
    if (!config.checkpoint.empty()) {
      save_checkpoint(model, config.checkpoint);
      const nlohmann::json extra = {{"epoch", epoch},
                                    {"step", state.step},
                                    {"best_metric", std::isnan(result.best_metric) ? nlohmann::json(nullptr)
                                                                                   : nlohmann::json(result.best_metric)},
                                    {"best_epoch", result.best_epoch}};
      save_optimizer_state(suffixed(config.checkpoint, ".state"), state.optimizer, params, extra);
    }
    row.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(row);
    if (on_epoch && !on_epoch(row)) break;
    if (capped) break;
  }
  result.optimizer = std::move(state.optimizer);
  return result;
}

}  // namespace

void fit_input_norm(Model& model, const Dataset& dataset) {
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const Sample* s : dataset.split(Split::train))
    for (double v : s->input.pixels) {
      sum += v;
      sq += v * v;
      ++n;
    }
  if (n == 0) throw ContractError("cannot fit the input norm: the train split is empty");
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sq / static_cast<double>(n) - mean * mean);
  const double sd = std::sqrt(var);
  model.set_input_norm(mean, sd > 1e-6 ? 1.0 / sd : 1.0);
}

TrainResult train(const TrainConfig& config, const Dataset& dataset, Model& model, const EpochCallback& on_epoch) {
  config.validate();
  if (config.standardize_input && !model.has_input_norm()) fit_input_norm(model, dataset);
  RunState state;
  state.optimizer = OptimizerState::for_parameters(model.parameters());
  return run(config, dataset, model, std::move(state), on_epoch);
}

TrainResult resume(const TrainConfig& config, const Dataset& dataset, Model& model, const EpochCallback& on_epoch) {
  if (config.checkpoint.empty()) throw ContractError("resume needs a checkpoint path");
  model = load_checkpoint(config.checkpoint, model.spec());
  nlohmann::json extra;
  RunState state;
  state.optimizer = load_optimizer_state(suffixed(config.checkpoint, ".state"), model.parameters(), &extra);
  state.next_epoch = extra.at("epoch").get<int>() + 1;
  state.step = extra.at("step").get<std::int64_t>();
  state.best_metric = extra.at("best_metric").is_null() ? kMissing : extra.at("best_metric").get<double>();
  state.best_epoch = extra.at("best_epoch").get<int>();
  return run(config, dataset, model, std::move(state), on_epoch);
}

// ---- evaluation ----

double MetricsReport::primary() const {
  const auto& all = overall();
  return task == Task::edges ? all.f : all.ssim;
}

const MetricsRow& MetricsReport::overall() const {
  for (const auto& r : rows)
    if (r.kind == "mean" && r.id == "all") return r;
  throw StateError("metrics report has no overall row");
}

std::string MetricsReport::to_csv() const {
  const bool edges = task == Task::edges;
  std::string out = edges ? "kind,id,snr,count,precision,recall,f\n" : "kind,id,sigma,count,psnr_noisy,psnr,ssim\n";
  for (const auto& r : rows) {
    if (edges)
      out += csv_line({r.kind, r.id, format_number(r.tag), std::to_string(r.count), format_number(r.precision),
                       format_number(r.recall), format_number(r.f)});
    else
      out += csv_line({r.kind, r.id, format_number(r.tag), std::to_string(r.count), format_number(r.psnr_noisy),
                       format_number(r.psnr), format_number(r.ssim)});
  }
  return out;
}

namespace {

struct Accumulator {
  std::size_t count = 0;
  double sums[5] = {};
};

}  // namespace

MetricsReport evaluate(const Predictor& predict, const std::vector<const Sample*>& samples, Task task,
                       const EvalOptions& options) {
  if (samples.empty()) throw ContractError("evaluate: the split is empty");
  if (options.redraws < 0) throw ContractError("evaluate: redraws must be >= 0");
  MetricsReport report;
  report.task = task;
  std::map<double, Accumulator> buckets;
  Accumulator all;
  for (std::size_t pos = 0; pos < samples.size(); ++pos) {
    const Sample& s = *samples[pos];
    MetricsRow row;
    row.kind = "image";
    row.id = s.id;
    row.tag = s.tag;
    double v[5] = {};
    if (task == Task::edges) {
      const int draws = std::max(1, options.redraws);
      for (int r = 0; r < draws; ++r) {
        GrayImage input = s.input;
        if (options.redraws > 0) {
          auto rng = derive_stream(options.seed, {kRedrawKey, pos, static_cast<std::uint64_t>(r)});
          input = apply_noise_model(s.clean, s.tag, rng);
        }
        const EdgeScore score = strict_f_measure(predict(input), s.label, options.threshold);
        v[0] += score.precision / draws;
        v[1] += score.recall / draws;
        v[2] += score.f / draws;
      }
      row.precision = v[0];
      row.recall = v[1];
      row.f = v[2];
    } else {
      const GrayImage out = predict(s.input);
      row.psnr_noisy = v[0] = psnr(s.input, s.clean).db;
      row.psnr = v[1] = psnr(out, s.clean).db;
      row.ssim = v[2] = ssim(out, s.clean);
    }
    report.rows.push_back(row);
    auto& bucket = buckets[s.tag];
    bucket.count += 1;
    for (int k = 0; k < 3; ++k) bucket.sums[k] += v[k];
    // Pure-noise samples have no edges to find; they are reported in their own
    // bucket but kept out of the overall mean.
    if (!s.pure_noise) {
      all.count += 1;
      for (int k = 0; k < 3; ++k) all.sums[k] += v[k];
    }
  }
  auto mean_row = [&](const std::string& id, double tag, const Accumulator& a) {
    MetricsRow row;
    row.kind = "mean";
    row.id = id;
    row.tag = tag;
    row.count = a.count;
    const double n = a.count > 0 ? static_cast<double>(a.count) : kMissing;
    if (task == Task::edges) {
      row.precision = a.sums[0] / n;
      row.recall = a.sums[1] / n;
      row.f = a.sums[2] / n;
    } else {
      row.psnr_noisy = a.sums[0] / n;
      row.psnr = a.sums[1] / n;
      row.ssim = a.sums[2] / n;
    }
    return row;
  };
  const char* tag_name = task == Task::edges ? "snr=" : "sigma=";
  for (const auto& [tag, acc] : buckets) report.rows.push_back(mean_row(tag_name + format_number(tag), tag, acc));
  report.rows.push_back(mean_row("all", kMissing, all));
  return report;
}

MetricsReport evaluate(const Model& model, const std::vector<const Sample*>& samples, Task task,
                       const EvalOptions& options) {
  return evaluate([&](const GrayImage& img) { return model.predict(img); }, samples, task, options);
}

}  // namespace faintedge
