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
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "faintedge/image.hpp"

namespace faintedge {

enum class Task { edges, denoise };
enum class Split { train, test };

const char* to_string(Task task);
const char* to_string(Split split);
Task task_from_string(const std::string& name);

struct Sample {
  std::string id;
  Split split = Split::train;
  GrayImage input;   // noisy image in [0, 1]
  BinaryMask label;  // edges task
  GrayImage clean;   // binary pattern (edges) or clean target (denoise)
  double tag = 0.0;  // snr (edges) or sigma on the 0-255 scale (denoise)
  int base_index = -1;
  bool hflipped = false;
  bool pure_noise = false;
  std::string source;
};

struct EdgeDatasetConfig {
  int base_count = 10;
  int height = 256;
  int width = 256;
  std::vector<double> snrs{1.0, 1.2, 1.4, 1.6, 1.8, 2.0};
  bool hflip = true;
  bool vflip_online = true;  // applied by the trainer, not stored
  double pure_noise_fraction = 0.02;
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
};

struct DenoiseDatasetConfig {
  std::vector<double> sigmas{25.0};
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
};

struct DatasetManifest {
  Task task = Task::edges;
  std::uint64_t seed = 0;
  int base_count = 0;
  int height = 0;
  int width = 0;
  std::vector<double> tags;  // snrs or sigmas
  bool hflip = false;
  bool vflip_online = false;
  double pure_noise_fraction = 0.0;
  double train_fraction = 0.9;

  nlohmann::json to_json(const std::vector<Sample>& samples) const;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<Sample> samples;

  std::vector<const Sample*> split(Split which) const;
};

// Fixed evaluation pattern: filled triangle, three straight strokes, an
// S-shaped cubic and three concentric rings. Strictly {0, 1}.
GrayImage render_eval_pattern(int height, int width);

// Procedural binary images, 2-6 primitives each, foreground fraction kept in
// (0.005, 0.5). Deterministic in (seed, image index).
std::vector<GrayImage> generate_binary_images(int count, int height, int width, std::uint64_t seed);

// Canny with default parameters.
BinaryMask extract_labels(const GrayImage& binary);

// clip(0.1 * (snr * clean + n) + 0.45), n ~ N(0, 1) per pixel.
GrayImage apply_noise_model(const GrayImage& clean, double snr, std::mt19937_64& rng);
GrayImage apply_noise_model(const GrayImage& clean, double snr, std::uint64_t seed);

// clip(clean + n / 255), n ~ N(0, sigma^2) with sigma on the 0-255 scale.
GrayImage add_gaussian_noise(const GrayImage& clean, double sigma255, std::mt19937_64& rng);

Dataset build_edge_dataset(const EdgeDatasetConfig& config);

// One noisy/clean pair per image, all in the training split.
std::vector<Sample> build_denoise_pairs(const std::vector<GrayImage>& images, double sigma255, std::uint64_t seed);

// Pairs for every (image, sigma), split at image granularity.
Dataset build_denoise_dataset(const std::vector<GrayImage>& images, const DenoiseDatasetConfig& config);

// Smooth piecewise images (shaded shapes over gradients) standing in for
// natural photographs.
std::vector<GrayImage> generate_natural_images(int count, int height, int width, std::uint64_t seed);

// 0.299 R + 0.587 G + 0.114 B.
GrayImage grayscale(const RgbImage& rgb);

// Noise stream of sample `index` (edges) or pair `index` (denoise).
std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t index);

// <root>/{train,test}/<id>_{in,label}.pgm plus manifest.json. Edge datasets
// also store <id>_clean.pgm so that noise can be redrawn during training.
void save_dataset(const Dataset& dataset, const std::filesystem::path& root);
Dataset load_dataset(const std::filesystem::path& root);

}  // namespace faintedge
