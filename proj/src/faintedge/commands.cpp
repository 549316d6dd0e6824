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

#include "faintedge/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>

#include "faintedge/datagen.hpp"
#include "faintedge/experiments.hpp"
#include "faintedge/filters.hpp"
#include "faintedge/metrics.hpp"
#include "faintedge/report.hpp"
#include "faintedge/trainer.hpp"
#include "faintedge/unet.hpp"

namespace faintedge {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Reads options with defaults, records the effective values and rejects
// anything that was not asked for.
class Options {
 public:
  explicit Options(const json& in) : in_(in.is_null() ? json::object() : in) {
    if (!in_.is_object()) throw ContractError("options must be a JSON object");
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    T value = present(key) ? read<T>(key) : fallback;
    resolved_[key] = value;
    return value;
  }

  template <class T>
  std::optional<T> maybe(const std::string& key) {
    used_.insert(key);
    if (!present(key)) {
      resolved_[key] = nullptr;
      return std::nullopt;
    }
    T value = read<T>(key);
    resolved_[key] = value;
    return value;
  }

  template <class T>
  T required(const std::string& key) {
    used_.insert(key);
    if (!present(key)) throw ContractError("missing required option '" + key + "'");
    T value = read<T>(key);
    resolved_[key] = value;
    return value;
  }

  bool has(const std::string& key) const { return present(key); }

  json finish() const {
    for (const auto& [key, value] : in_.items())
      if (!used_.count(key)) throw ContractError("unknown option '" + key + "'");
    return resolved_;
  }

 private:
  bool present(const std::string& key) const { return in_.contains(key) && !in_.at(key).is_null(); }

  template <class T>
  T read(const std::string& key) const {
    try {
      return in_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ContractError("option '" + key + "' has the wrong type: " + in_.at(key).dump());
    }
  }

  json in_;
  json resolved_ = json::object();
  std::set<std::string> used_;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<double> snr_list(Options& o, const std::vector<double>& fallback) {
  auto v = o.get<std::vector<double>>("snrs", fallback);
  if (v.empty()) throw ContractError("snrs must not be empty");
  return v;
}

Model load_model(const std::string& path) {
  if (!fs::exists(path)) throw IoError("checkpoint not found: " + path);
  return load_checkpoint(path);
}

CommandOutcome gen_edges(Options& o) {
  EdgeDatasetConfig c;
  const auto out = o.required<std::string>("out");
  c.base_count = o.get("base", c.base_count);
  const int size = o.get("size", 256);
  c.height = o.get("height", size);
  c.width = o.get("width", size);
  c.snrs = snr_list(o, c.snrs);
  c.hflip = o.get("hflip", c.hflip);
  c.vflip_online = o.get("vflip_online", c.vflip_online);
  c.pure_noise_fraction = o.get("pure_noise_fraction", c.pure_noise_fraction);
  c.train_fraction = o.get("train_fraction", c.train_fraction);
  c.seed = o.get<std::uint64_t>("seed", c.seed);
  const json config = o.finish();
  const Dataset ds = build_edge_dataset(c);
  save_dataset(ds, out);
  return {config, {{"samples", ds.samples.size()},
                   {"train", ds.split(Split::train).size()},
                   {"test", ds.split(Split::test).size()}}};
}

std::vector<GrayImage> load_image_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension().string();
    if (ext == ".pgm" || ext == ".ppm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<GrayImage> out;
  for (const auto& f : files)
    out.push_back(f.extension() == ".ppm" ? grayscale(read_ppm(f)) : read_pgm(f));
  if (out.empty()) throw IoError("no .pgm or .ppm images under " + dir.string());
  return out;
}

// Non-overlapping patch x patch tiles in raster order.
std::vector<GrayImage> tile(const std::vector<GrayImage>& images, int patch, int limit) {
  std::vector<GrayImage> out;
  for (const auto& img : images)
    for (int y = 0; y + patch <= img.height; y += patch)
      for (int x = 0; x + patch <= img.width; x += patch) {
        if (limit > 0 && static_cast<int>(out.size()) >= limit) return out;
        out.push_back(crop(img, y, x, patch, patch));
      }
  return out;
}

CommandOutcome gen_denoise(Options& o) {
  DenoiseDatasetConfig c;
  const auto out = o.required<std::string>("out");
  const auto images_dir = o.maybe<std::string>("images");
  const int count = o.get("count", 16);
  const int patch = o.get("patch", 128);
  const int limit = o.get("max_patches", 0);
  c.sigmas = o.get("sigmas", c.sigmas);
  c.train_fraction = o.get("train_fraction", c.train_fraction);
  c.seed = o.get<std::uint64_t>("seed", c.seed);
  const json config = o.finish();
  if (patch <= 0 || patch % UNetSpec::kDivisor != 0)
    throw GeometryError("patch must be a positive multiple of 8, got " + std::to_string(patch));
  std::vector<GrayImage> patches = images_dir ? tile(load_image_dir(*images_dir), patch, limit)
                                              : generate_natural_images(count, patch, patch, c.seed);
  const Dataset ds = build_denoise_dataset(patches, c);
  save_dataset(ds, out);
  return {config, {{"samples", ds.samples.size()},
                   {"train", ds.split(Split::train).size()},
                   {"test", ds.split(Split::test).size()}}};
}

CommandOutcome train_command(Options& o) {
  const auto data = o.required<std::string>("data");
  const Dataset ds = load_dataset(data);
  TrainConfig c;
  c.task = ds.manifest.task;
  c.checkpoint = o.required<std::string>("out");
  const int width = o.get("width", 64);
  const auto init = o.maybe<std::string>("init");
  const DType dtype = dtype_from_string(o.get<std::string>("dtype", "f32"));
  c.epochs = o.get("epochs", c.task == Task::edges ? 100 : 200);
  c.batch = o.get("batch", c.batch);
  c.optimizer.kind = optimizer_from_string(o.get<std::string>("optimizer", "adam"));
  c.optimizer.lr = o.get("lr", c.optimizer.lr);
  c.optimizer.beta1 = o.get("beta1", c.optimizer.beta1);
  c.optimizer.beta2 = o.get("beta2", c.optimizer.beta2);
  c.optimizer.epsilon = o.get("epsilon", c.optimizer.epsilon);
  c.optimizer.momentum = o.get("momentum", c.optimizer.momentum);
  c.lambda_edge = o.get("lambda_edge", c.lambda_edge);
  c.seed = o.get<std::uint64_t>("seed", c.seed);
  c.eval_every = o.get("eval_every", c.eval_every);
  c.crop = o.get("crop", c.crop);
  c.grad_clip = o.get("grad_clip", c.grad_clip);
  c.resample_noise = o.get("resample_noise", c.resample_noise);
  c.hflip = o.get("hflip", c.task == Task::denoise);
  c.vflip = o.get("vflip", c.task == Task::denoise || ds.manifest.vflip_online);
  c.max_steps = o.get<std::int64_t>("max_steps", c.max_steps);
  c.eval_threshold = o.get("threshold", c.eval_threshold);
  c.standardize_input = o.get("standardize_input", c.standardize_input);
  const bool resume_run = o.get("resume", false);
  const auto log_path = o.get<std::string>("log", c.checkpoint + ".log.csv");
  const json config = o.finish();
  c.validate();

  Model model = init ? load_checkpoint(*init, UNetSpec::make(1, width))
                     : Model::build(UNetSpec::make(1, width), c.seed, dtype);
  const TrainResult r = resume_run ? resume(c, ds, model) : train(c, ds, model);
  write_text(log_path, log_to_csv(r.log));
  json result = {{"epochs_run", r.log.size()},
                 {"steps", r.log.empty() ? 0 : r.log.back().step},
                 {"best_epoch", r.best_epoch},
                 {"log", log_path}};
  result["best_metric"] = std::isnan(r.best_metric) ? json(nullptr) : json(r.best_metric);
  result["final_loss"] = r.log.empty() || std::isnan(r.log.back().loss) ? json(nullptr) : json(r.log.back().loss);
  return {config, result};
}

CommandOutcome eval_command(Options& o) {
  const auto pred = o.maybe<std::string>("pred");
  const auto ref = o.maybe<std::string>("ref");
  const auto ckpt = o.maybe<std::string>("ckpt");
  const auto data = o.maybe<std::string>("data");
  const auto split_name = o.get<std::string>("split", "test");
  const double threshold = o.get("threshold", 0.5);
  const int redraws = o.get("redraws", 0);
  const auto seed = o.get<std::uint64_t>("seed", 0);
  const auto task_name = o.maybe<std::string>("task");
  const auto out = o.maybe<std::string>("out");
  const json config = o.finish();

  std::string csv;
  json result;
  if (pred || ref) {
    if (!pred || !ref) throw ContractError("image mode needs both 'pred' and 'ref'");
    if (ckpt || data) throw ContractError("give either pred/ref images or ckpt/data, not both");
    const Task task = task_from_string(task_name.value_or("denoise"));
    const GrayImage p = read_pgm(*pred), r = read_pgm(*ref);
    if (task == Task::edges) {
      const EdgeScore s = strict_f_measure(p, faintedge::threshold(r, 0.5), threshold);
      csv = "precision,recall,f\n" + csv_line({format_number(s.precision), format_number(s.recall), format_number(s.f)});
      result = {{"precision", s.precision}, {"recall", s.recall}, {"f", s.f}};
    } else {
      const Psnr ps = psnr(p, r);
      const double ss = ssim(p, r);
      csv = "psnr,ssim\n" + csv_line({format_number(ps.db), format_number(ss)});
      result = {{"psnr", ps.saturated ? json("inf") : json(ps.db)}, {"ssim", ss}};
    }
  } else {
    if (!ckpt || !data) throw ContractError("dataset mode needs 'ckpt' and 'data'");
    const Dataset ds = load_dataset(*data);
    if (task_name && task_from_string(*task_name) != ds.manifest.task)
      throw ContractError("task option disagrees with the dataset manifest");
    if (split_name != "train" && split_name != "test") throw ContractError("split must be train or test");
    const Model model = load_model(*ckpt);
    const auto samples = ds.split(split_name == "train" ? Split::train : Split::test);
    const MetricsReport report = evaluate(model, samples, ds.manifest.task, {threshold, redraws, seed});
    csv = report.to_csv();
    result = {{"images", samples.size()}, {"primary", report.primary()}};
  }
  if (out) write_text(*out, csv);
  result["csv"] = csv;
  return {config, result};
}

CommandOutcome detect_command(Options& o) {
  const auto ckpt = o.required<std::string>("ckpt");
  const auto in = o.required<std::string>("in");
  const auto out = o.required<std::string>("out");
  const auto threshold = o.maybe<double>("threshold");
  const json config = o.finish();
  const Model model = load_model(ckpt);
  const GrayImage map = model.predict(read_pgm(in));
  if (threshold) {
    if (!(*threshold >= 0.0 && *threshold <= 1.0)) throw ContractError("threshold must lie in [0, 1]");
    const BinaryMask mask = faintedge::threshold(map, *threshold);
    write_pgm(out, mask);
    return {config, {{"edge_pixels", mask.count()}}};
  }
  write_pgm(out, map);
  return {config, {{"height", map.height}, {"width", map.width}}};
}

CommandOutcome denoise_command(Options& o) {
  const auto ckpt = o.required<std::string>("ckpt");
  const auto in = o.required<std::string>("in");
  const auto out = o.required<std::string>("out");
  const auto clean = o.maybe<std::string>("clean");
  const json config = o.finish();
  const Model model = load_model(ckpt);
  const GrayImage noisy = read_pgm(in);
  const GrayImage result = model.predict(noisy);
  write_pgm(out, result);
  json r = {{"height", result.height}, {"width", result.width}};
  if (clean) {
    const GrayImage ref = read_pgm(*clean);
    const Psnr p = psnr(quantize8(result), ref);
    r["psnr"] = p.saturated ? json("inf") : json(p.db);
    r["psnr_noisy"] = psnr(noisy, ref).db;
  }
  return {config, r};
}

CommandOutcome canny_command(Options& o) {
  CannyParams p;
  const auto in = o.required<std::string>("in");
  const auto out = o.required<std::string>("out");
  p.low = o.get("low", p.low);
  p.high = o.get("high", p.high);
  p.sigma = o.get("sigma", p.sigma);
  const json config = o.finish();
  const BinaryMask mask = canny(read_pgm(in), p);
  write_pgm(out, mask);
  return {config, {{"edge_pixels", mask.count()}}};
}

CommandOutcome bench_command(Options& o) {
  const auto ckpt = o.maybe<std::string>("ckpt");
  const int width = o.get("width", 64);
  const auto sizes = o.get<std::vector<int>>("sizes", {128, 256});
  const int repeat = o.get("repeat", 5);
  const auto seed = o.get<std::uint64_t>("seed", 0);
  const auto out = o.maybe<std::string>("out");
  const json config = o.finish();
  const Model model = ckpt ? load_model(*ckpt) : Model::build(UNetSpec::make(1, width), seed);
  const auto rows = bench_forward(model, sizes, repeat, seed);
  const std::string csv = bench_to_csv(rows);
  if (out) write_text(*out, csv);
  json result = {{"csv", csv}};
  if (rows.size() >= 2 && rows.front().median_ms > 0.0)
    result["ratio_last_first"] = rows.back().median_ms / rows.front().median_ms;
  return {config, result};
}

CommandOutcome gradcheck_command(Options& o) {
  GradSuiteOptions g;
  const int seeds = o.get("seeds", 10);
  const auto first_seed = o.get<std::uint64_t>("seed", 0);
  g.include_unet = o.get("unet", g.include_unet);
  g.unet_width = o.get("unet_width", g.unet_width);
  g.unet_size = o.get("unet_size", g.unet_size);
  g.tolerance = o.get("tolerance", g.tolerance);
  g.unet_tolerance = o.get("unet_tolerance", g.unet_tolerance);
  const auto out = o.maybe<std::string>("out");
  const json config = o.finish();
  if (seeds < 1) throw ContractError("seeds must be >= 1");
  g.seeds.clear();
  for (int i = 0; i < seeds; ++i) g.seeds.push_back(first_seed + static_cast<std::uint64_t>(i));
  const GradSuiteResult r = gradcheck_suite(g);
  const std::string csv = r.to_csv();
  if (out) write_text(*out, csv);
  std::size_t failed = 0;
  for (const auto& c : r.cases) failed += !c.report.passed();
  return {config, {{"passed", r.passed()}, {"cases", r.cases.size()}, {"failed_cases", failed}, {"csv", csv}}};
}

CommandOutcome sweep_command(Options& o) {
  SweepOptions s;
  const auto ckpt = o.required<std::string>("ckpt");
  const auto pattern_path = o.maybe<std::string>("pattern");
  const int size = o.get("size", 128);
  s.snrs = snr_list(o, s.snrs);
  s.iterations = o.get("iterations", s.iterations);
  s.seed = o.get<std::uint64_t>("seed", s.seed);
  s.threshold = o.get("threshold", s.threshold);
  s.canny.low = o.get("canny_low", s.canny.low);
  s.canny.high = o.get("canny_high", s.canny.high);
  s.canny.sigma = o.get("canny_sigma", s.canny.sigma);
  const auto out = o.maybe<std::string>("out");
  const auto svg = o.maybe<std::string>("svg");
  const json config = o.finish();
  const Model model = load_model(ckpt);
  const GrayImage pattern = pattern_path ? read_pgm(*pattern_path) : render_eval_pattern(size, size);
  const auto rows = snr_sweep([&](const GrayImage& img) { return model.predict(img); }, pattern, s);
  const std::string csv = sweep_to_csv(rows);
  if (out) write_text(*out, csv);
  if (svg) write_text(*svg, sweep_to_svg(rows));
  return {config, {{"csv", csv}}};
}

}  // namespace

std::vector<std::string> command_names() {
  return {"gen-edges", "gen-denoise", "train", "eval", "detect", "denoise", "canny", "bench", "gradcheck", "snr-sweep"};
}

CommandOutcome run_command(const std::string& name, const nlohmann::json& options) {
  static const std::map<std::string, CommandOutcome (*)(Options&)> table = {
      {"gen-edges", gen_edges},       {"gen-denoise", gen_denoise}, {"train", train_command},
      {"eval", eval_command},         {"detect", detect_command},   {"denoise", denoise_command},
      {"canny", canny_command},       {"bench", bench_command},     {"gradcheck", gradcheck_command},
      {"snr-sweep", sweep_command}};
  const auto it = table.find(name);
  if (it == table.end()) throw ContractError("unknown command '" + name + "'");
  Options o(options);
  try {
    return it->second(o);
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("bad option value: ") + e.what());
  }
}

}  // namespace faintedge
