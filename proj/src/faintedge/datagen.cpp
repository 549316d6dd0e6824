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

#include "faintedge/datagen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "faintedge/filters.hpp"
#include "faintedge/rng.hpp"

namespace faintedge {

const char* to_string(Task task) { return task == Task::edges ? "edges" : "denoise"; }
const char* to_string(Split split) { return split == Split::train ? "train" : "test"; }

Task task_from_string(const std::string& name) {
  if (name == "edges") return Task::edges;
  if (name == "denoise") return Task::denoise;
  throw ContractError("unknown task '" + name + "' (expected edges or denoise)");
}

namespace {

// Stream keys.
constexpr std::uint64_t kBaseKey = 0xB45E;
constexpr std::uint64_t kNoiseKey = 0x9015E;
constexpr std::uint64_t kSplitKey = 0x5B117;
constexpr std::uint64_t kNaturalKey = 0x9A7;

struct Point {
  double x, y;
};

double segment_distance(Point p, Point a, Point b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

// Pixel (y, x) is covered when its center lies inside the shape.
void stroke_polyline(GrayImage& img, const std::vector<Point>& pts, double thickness, double value = 1.0) {
  const double r = thickness / 2.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Point a = pts[i], b = pts[i + 1];
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - r - 1)));
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + r + 1)));
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - r - 1)));
    const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + r + 1)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (segment_distance({x + 0.5, y + 0.5}, a, b) <= r) img.at(y, x) = value;
  }
}

bool inside_polygon(Point p, const std::vector<Point>& poly) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

void fill_polygon(GrayImage& img, const std::vector<Point>& poly, double value = 1.0) {
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (inside_polygon({x + 0.5, y + 0.5}, poly)) img.at(y, x) = value;
}

// Filled ellipse, or a ring of the given thickness when thickness > 0.
void draw_ellipse(GrayImage& img, Point c, double rx, double ry, double angle, double thickness,
                  double value = 1.0) {
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double dx = x + 0.5 - c.x, dy = y + 0.5 - c.y;
      const double u = (dx * ca + dy * sa) / rx;
      const double v = (-dx * sa + dy * ca) / ry;
      const double rho = std::sqrt(u * u + v * v);
      if (thickness <= 0.0) {
        if (rho <= 1.0) img.at(y, x) = value;
      } else {
        // Radial distance to the outline, measured along the mean radius.
        const double mean_r = 0.5 * (rx + ry);
        if (std::abs(rho - 1.0) * mean_r <= thickness / 2.0) img.at(y, x) = value;
      }
    }
}

std::vector<Point> bezier(const std::vector<Point>& ctrl, int steps) {
  std::vector<Point> pts;
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    std::vector<Point> tmp = ctrl;
    for (std::size_t level = tmp.size() - 1; level > 0; --level)
      for (std::size_t j = 0; j < level; ++j)
        tmp[j] = {tmp[j].x + t * (tmp[j + 1].x - tmp[j].x), tmp[j].y + t * (tmp[j + 1].y - tmp[j].y)};
    pts.push_back(tmp[0]);
  }
  return pts;
}

double foreground_fraction(const GrayImage& img) {
  double s = 0.0;
  for (double v : img.pixels) s += v;
  return s / static_cast<double>(img.size());
}

GrayImage random_binary_image(int height, int width, std::mt19937_64& rng) {
  const double S = std::min(height, width);
  GrayImage img(height, width);
  const int primitives = uniform_int(rng, 2, 6);
  auto rand_point = [&](double margin) {
    return Point{uniform(rng, margin * width, (1.0 - margin) * width),
                 uniform(rng, margin * height, (1.0 - margin) * height)};
  };
  const double max_thick = std::max(2.0, S / 32.0);
  for (int p = 0; p < primitives; ++p) {
    switch (uniform_int(rng, 0, 4)) {
      case 0: {  // star-shaped polygon
        const Point c = rand_point(0.15);
        const int n = uniform_int(rng, 3, 6);
        const double r = uniform(rng, 0.08, 0.25) * S;
        std::vector<double> angles;
        for (int i = 0; i < n; ++i) angles.push_back(uniform(rng, 0.0, 2.0 * std::numbers::pi));
        std::sort(angles.begin(), angles.end());
        std::vector<Point> poly;
        for (double a : angles) {
          const double rr = r * uniform(rng, 0.6, 1.0);
          poly.push_back({c.x + rr * std::cos(a), c.y + rr * std::sin(a)});
        }
        fill_polygon(img, poly);
        break;
      }
      case 1: {  // ellipse, filled or outline
        const Point c = rand_point(0.15);
        const double rx = uniform(rng, 0.06, 0.22) * S, ry = uniform(rng, 0.06, 0.22) * S;
        const double angle = uniform(rng, 0.0, std::numbers::pi);
        const bool filled = uniform01(rng) < 0.5;
        draw_ellipse(img, c, rx, ry, angle, filled ? 0.0 : uniform(rng, 2.0, max_thick));
        break;
      }
      case 2: {  // line strip
        const int n = uniform_int(rng, 2, 4);
        std::vector<Point> pts;
        for (int i = 0; i < n; ++i) pts.push_back(rand_point(0.05));
        stroke_polyline(img, pts, uniform(rng, 2.0, max_thick));
        break;
      }
      default: {  // quadratic or cubic curve
        const int order = uniform_int(rng, 2, 3);
        std::vector<Point> ctrl;
        for (int i = 0; i <= order; ++i) ctrl.push_back(rand_point(0.05));
        stroke_polyline(img, bezier(ctrl, 64), uniform(rng, 2.0, max_thick));
        break;
      }
    }
  }
  return img;
}

}  // namespace

std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t index) {
  return derive_stream(seed, {kNoiseKey, index});
}

GrayImage render_eval_pattern(int height, int width) {
  if (height < 64 || width < 64)
    throw GeometryError("render_eval_pattern: needs at least 64x64, got " + std::to_string(height) + "x" +
                        std::to_string(width));
  GrayImage img(height, width);
  const double W = width, H = height, S = std::min(height, width);
  const double t = std::max(2.0, S / 40.0);
  auto at = [&](double u, double v) { return Point{u * W, v * H}; };

  fill_polygon(img, {at(0.08, 0.40), at(0.40, 0.40), at(0.24, 0.08)});

  stroke_polyline(img, {at(0.55, 0.10), at(0.93, 0.10)}, t);
  stroke_polyline(img, {at(0.62, 0.20), at(0.93, 0.42)}, t);
  stroke_polyline(img, {at(0.55, 0.20), at(0.55, 0.44)}, t);

  stroke_polyline(img, bezier({at(0.38, 0.58), at(-0.05, 0.58), at(0.55, 0.94), at(0.12, 0.94)}, 128), t);

  const Point c = at(0.72, 0.74);
  for (double r : {0.06, 0.12, 0.18}) draw_ellipse(img, c, r * S, r * S, 0.0, t);
  return img;
}

std::vector<GrayImage> generate_binary_images(int count, int height, int width, std::uint64_t seed) {
  if (count < 1) throw ContractError("generate_binary_images: count must be >= 1");
  std::vector<GrayImage> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    auto rng = derive_stream(seed, {kBaseKey, static_cast<std::uint64_t>(i)});
    GrayImage img;
    double frac = 0.0;
    do {
      img = random_binary_image(height, width, rng);
      frac = foreground_fraction(img);
    } while (!(frac > 0.005 && frac < 0.5));
    out.push_back(std::move(img));
  }
  return out;
}

BinaryMask extract_labels(const GrayImage& binary) { return canny(binary, CannyParams{}); }

GrayImage apply_noise_model(const GrayImage& clean, double snr, std::mt19937_64& rng) {
  if (!(snr >= 0.0)) throw ContractError("snr must be non-negative");
  std::normal_distribution<double> normal(0.0, 1.0);
  GrayImage out(clean.height, clean.width);
  for (std::size_t i = 0; i < clean.size(); ++i)
    out.pixels[i] = std::clamp(0.1 * (snr * clean.pixels[i] + normal(rng)) + 0.45, 0.0, 1.0);
  return out;
}

GrayImage apply_noise_model(const GrayImage& clean, double snr, std::uint64_t seed) {
  auto rng = derive_stream(seed, {kNoiseKey});
  return apply_noise_model(clean, snr, rng);
}

GrayImage add_gaussian_noise(const GrayImage& clean, double sigma255, std::mt19937_64& rng) {
  if (!(sigma255 >= 0.0)) throw ContractError("sigma must be non-negative");
  GrayImage out = clean;
  if (sigma255 == 0.0) return out;
  std::normal_distribution<double> normal(0.0, sigma255 / 255.0);
  for (double& v : out.pixels) v = std::clamp(v + normal(rng), 0.0, 1.0);
  return out;
}

namespace {

char id_buffer[32];

std::string sample_id(std::size_t index) {
  std::snprintf(id_buffer, sizeof id_buffer, "s%06zu", index);
  return id_buffer;
}

// Assigns each of `count` groups to train/test; at least one in each when count >= 2.
std::vector<Split> split_groups(int count, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ContractError("train fraction must lie in (0, 1)");
  std::vector<int> order(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) order[static_cast<std::size_t>(i)] = i;
  auto rng = derive_stream(seed, {kSplitKey});
  for (int i = count - 1; i > 0; --i) std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(uniform_int(rng, 0, i))]);
  int n_train = static_cast<int>(std::lround(train_fraction * count));
  n_train = std::clamp(n_train, 1, std::max(1, count - 1));
  std::vector<Split> out(static_cast<std::size_t>(count), Split::test);
  for (int i = 0; i < n_train; ++i) out[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = Split::train;
  return out;
}

}  // namespace

Dataset build_edge_dataset(const EdgeDatasetConfig& config) {
  if (config.base_count < 2) throw ContractError("build_edge_dataset: need at least 2 base images to split");
  if (config.snrs.empty()) throw ContractError("build_edge_dataset: empty snr list");
  if (!(config.pure_noise_fraction >= 0.0)) throw ContractError("pure noise fraction must be >= 0");

  Dataset ds;
  auto& m = ds.manifest;
  m.task = Task::edges;
  m.seed = config.seed;
  m.base_count = config.base_count;
  m.height = config.height;
  m.width = config.width;
  m.tags = config.snrs;
  m.hflip = config.hflip;
  m.vflip_online = config.vflip_online;
  m.pure_noise_fraction = config.pure_noise_fraction;
  m.train_fraction = config.train_fraction;

  const auto bases = generate_binary_images(config.base_count, config.height, config.width, config.seed);
  const auto splits = split_groups(config.base_count, config.train_fraction, config.seed);

  std::size_t index = 0;
  for (int b = 0; b < config.base_count; ++b) {
    for (int variant = 0; variant < (config.hflip ? 2 : 1); ++variant) {
      const GrayImage clean = variant ? hflip(bases[static_cast<std::size_t>(b)]) : bases[static_cast<std::size_t>(b)];
      const BinaryMask label = extract_labels(clean);
      for (double snr : config.snrs) {
        Sample s;
        s.id = sample_id(index);
        s.split = splits[static_cast<std::size_t>(b)];
        auto rng = sample_stream(config.seed, index);
        s.input = apply_noise_model(clean, snr, rng);
        s.label = label;
        s.clean = clean;
        s.tag = snr;
        s.base_index = b;
        s.hflipped = variant == 1;
        s.source = "procedural";
        ds.samples.push_back(std::move(s));
        ++index;
      }
    }
  }

  const std::size_t core = ds.samples.size();
  const auto noise_count = static_cast<std::size_t>(std::ceil(config.pure_noise_fraction * static_cast<double>(core) - 1e-9));
  const auto noise_test = static_cast<std::size_t>(std::lround((1.0 - config.train_fraction) * static_cast<double>(noise_count)));
  const GrayImage blank(config.height, config.width);
  for (std::size_t k = 0; k < noise_count; ++k) {
    Sample s;
    s.id = sample_id(index);
    s.split = k < noise_test ? Split::test : Split::train;
    auto rng = sample_stream(config.seed, index);
    s.input = apply_noise_model(blank, 0.0, rng);
    s.label = BinaryMask(config.height, config.width);
    s.clean = blank;
    s.tag = 0.0;
    s.pure_noise = true;
    s.source = "noise";
    ds.samples.push_back(std::move(s));
    ++index;
  }
  return ds;
}

std::vector<Sample> build_denoise_pairs(const std::vector<GrayImage>& images, double sigma255, std::uint64_t seed) {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    Sample s;
    s.id = sample_id(i);
    auto rng = sample_stream(seed, i);
    s.input = add_gaussian_noise(images[i], sigma255, rng);
    s.clean = images[i];
    s.tag = sigma255;
    s.base_index = static_cast<int>(i);
    s.source = "image";
    out.push_back(std::move(s));
  }
  return out;
}

Dataset build_denoise_dataset(const std::vector<GrayImage>& images, const DenoiseDatasetConfig& config) {
  if (images.size() < 2) throw ContractError("build_denoise_dataset: need at least 2 images to split");
  if (config.sigmas.empty()) throw ContractError("build_denoise_dataset: empty sigma list");
  Dataset ds;
  auto& m = ds.manifest;
  m.task = Task::denoise;
  m.seed = config.seed;
  m.base_count = static_cast<int>(images.size());
  m.height = images.front().height;
  m.width = images.front().width;
  m.tags = config.sigmas;
  m.train_fraction = config.train_fraction;
  const auto splits = split_groups(static_cast<int>(images.size()), config.train_fraction, config.seed);
  std::size_t index = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (double sigma : config.sigmas) {
      Sample s;
      s.id = sample_id(index);
      s.split = splits[i];
      auto rng = sample_stream(config.seed, index);
      s.input = add_gaussian_noise(images[i], sigma, rng);
      s.clean = images[i];
      s.tag = sigma;
      s.base_index = static_cast<int>(i);
      s.source = "image";
      ds.samples.push_back(std::move(s));
      ++index;
    }
  }
  return ds;
}

std::vector<GrayImage> generate_natural_images(int count, int height, int width, std::uint64_t seed) {
  std::vector<GrayImage> out;
  for (int i = 0; i < count; ++i) {
    auto rng = derive_stream(seed, {kNaturalKey, static_cast<std::uint64_t>(i)});
    GrayImage img(height, width);
    const double base = uniform(rng, 0.25, 0.75);
    const double gx = uniform(rng, -0.3, 0.3), gy = uniform(rng, -0.3, 0.3);
    const double fx = uniform(rng, 2.0, 6.0), fy = uniform(rng, 2.0, 6.0);
    const double amp = uniform(rng, 0.02, 0.06);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double u = static_cast<double>(x) / width - 0.5, v = static_cast<double>(y) / height - 0.5;
        img.at(y, x) = base + gx * u + gy * v +
                       amp * std::sin(2.0 * std::numbers::pi * (fx * u + fy * v));
      }
    const int shapes = uniform_int(rng, 3, 7);
    const double S = std::min(height, width);
    for (int k = 0; k < shapes; ++k) {
      GrayImage layer(height, width, -1.0);
      const Point c{uniform(rng, 0.1, 0.9) * width, uniform(rng, 0.1, 0.9) * height};
      if (uniform01(rng) < 0.5) {
        draw_ellipse(layer, c, uniform(rng, 0.05, 0.3) * S, uniform(rng, 0.05, 0.3) * S,
                     uniform(rng, 0.0, std::numbers::pi), 0.0, 1.0);
      } else {
        std::vector<Point> poly;
        const int n = uniform_int(rng, 3, 6);
        std::vector<double> angles;
        for (int j = 0; j < n; ++j) angles.push_back(uniform(rng, 0.0, 2.0 * std::numbers::pi));
        std::sort(angles.begin(), angles.end());
        const double r = uniform(rng, 0.08, 0.3) * S;
        for (double a : angles) poly.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
        fill_polygon(layer, poly, 1.0);
      }
      const double level = uniform(rng, 0.05, 0.95);
      const double sx = uniform(rng, -0.2, 0.2), sy = uniform(rng, -0.2, 0.2);
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
          if (layer.at(y, x) > 0.0)
            img.at(y, x) = level + sx * (static_cast<double>(x) / width - 0.5) + sy * (static_cast<double>(y) / height - 0.5);
    }
    img = gaussian_blur(img, 0.6);
    for (double& v : img.pixels) v = std::clamp(v, 0.0, 1.0);
    out.push_back(std::move(img));
  }
  return out;
}

GrayImage grayscale(const RgbImage& rgb) {
  if (rgb.channels != 3 || rgb.pixels.size() != static_cast<std::size_t>(rgb.height) * rgb.width * 3)
    throw DimensionError("grayscale: expected a 3-channel image, got " + std::to_string(rgb.channels) + " channels");
  GrayImage out(rgb.height, rgb.width);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.pixels[i] = 0.299 * rgb.pixels[3 * i] + 0.587 * rgb.pixels[3 * i + 1] + 0.114 * rgb.pixels[3 * i + 2];
  return out;
}

std::vector<const Sample*> Dataset::split(Split which) const {
  std::vector<const Sample*> out;
  for (const auto& s : samples)
    if (s.split == which) out.push_back(&s);
  return out;
}

nlohmann::json DatasetManifest::to_json(const std::vector<Sample>& samples) const {
  nlohmann::json j;
  j["version"] = 1;
  j["task"] = to_string(task);
  j["seed"] = seed;
  j["base_count"] = base_count;
  j["height"] = height;
  j["width"] = width;
  j[task == Task::edges ? "snrs" : "sigmas"] = tags;
  j["augmentation"] = {{"hflip", hflip}, {"vflip_online", vflip_online}};
  j["pure_noise_fraction"] = pure_noise_fraction;
  j["split"] = {{"train", train_fraction}, {"test", 1.0 - train_fraction}};
  nlohmann::json list = nlohmann::json::array();
  for (const auto& s : samples)
    list.push_back({{"id", s.id},
                    {"split", to_string(s.split)},
                    {task == Task::edges ? "snr" : "sigma", s.tag},
                    {"base", s.base_index},
                    {"hflip", s.hflipped},
                    {"pure_noise", s.pure_noise},
                    {"source", s.source}});
  j["samples"] = list;
  return j;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::error_code ec;
  for (const char* sub : {"train", "test"}) {
    fs::create_directories(root / sub, ec);
    if (ec) throw IoError("cannot create " + (root / sub).string() + ": " + ec.message());
  }
  for (const auto& s : dataset.samples) {
    const fs::path dir = root / to_string(s.split);
    write_pgm(dir / (s.id + "_in.pgm"), s.input);
    if (dataset.manifest.task == Task::edges) {
      write_pgm(dir / (s.id + "_label.pgm"), s.label);
      write_pgm(dir / (s.id + "_clean.pgm"), s.clean);
    } else {
      write_pgm(dir / (s.id + "_label.pgm"), s.clean);
    }
  }
  std::ofstream out(root / "manifest.json");
  if (!out) throw IoError("cannot write " + (root / "manifest.json").string());
  out << dataset.manifest.to_json(dataset.samples).dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& root) {
  std::ifstream in(root / "manifest.json");
  if (!in) throw IoError("no manifest.json under " + root.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  Dataset ds;
  auto& m = ds.manifest;
  try {
    m.task = task_from_string(j.at("task").get<std::string>());
    const bool edges = m.task == Task::edges;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.base_count = j.at("base_count").get<int>();
    m.height = j.at("height").get<int>();
    m.width = j.at("width").get<int>();
    m.tags = j.at(edges ? "snrs" : "sigmas").get<std::vector<double>>();
    m.hflip = j.at("augmentation").at("hflip").get<bool>();
    m.vflip_online = j.at("augmentation").at("vflip_online").get<bool>();
    m.pure_noise_fraction = j.at("pure_noise_fraction").get<double>();
    m.train_fraction = j.at("split").at("train").get<double>();
    for (const auto& e : j.at("samples")) {
      Sample s;
      s.id = e.at("id").get<std::string>();
      const auto split = e.at("split").get<std::string>();
      if (split != "train" && split != "test") throw FormatError("bad split '" + split + "'");
      s.split = split == "train" ? Split::train : Split::test;
      s.tag = e.at(edges ? "snr" : "sigma").get<double>();
      s.base_index = e.at("base").get<int>();
      s.hflipped = e.at("hflip").get<bool>();
      s.pure_noise = e.at("pure_noise").get<bool>();
      s.source = e.at("source").get<std::string>();
      const auto dir = root / split;
      s.input = read_pgm(dir / (s.id + "_in.pgm"));
      if (edges) {
        s.label = threshold(read_pgm(dir / (s.id + "_label.pgm")), 0.5);
        s.clean = read_pgm(dir / (s.id + "_clean.pgm"));
      } else {
        s.clean = read_pgm(dir / (s.id + "_label.pgm"));
      }
      ds.samples.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  return ds;
}

}  // namespace faintedge
