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
#include <span>
#include <vector>

#include "faintedge/tensor.hpp"

namespace faintedge {

// Row-major single-channel image. Intensities live in [0, 1]; filter responses
// (Sobel) reuse the type without that bound.
struct GrayImage {
  int height = 0;
  int width = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(int h, int w, double value = 0.0)
      : height(h), width(w), pixels(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), value) {}

  double& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return pixels.size(); }
  bool same_size(const GrayImage& o) const { return height == o.height && width == o.width; }
  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;

  BinaryMask() = default;
  BinaryMask(int h, int w)
      : height(h), width(w), pixels(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), 0) {}

  std::uint8_t& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return pixels.size(); }
  std::size_t count() const;
  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

// Interleaved RGB in [0, 1].
struct RgbImage {
  int height = 0;
  int width = 0;
  int channels = 3;
  std::vector<double> pixels;
};

GrayImage to_gray(const BinaryMask& mask);
// Pixels >= threshold become 1.
BinaryMask threshold(const GrayImage& img, double level);
bool is_binary(const GrayImage& img);

GrayImage hflip(const GrayImage& img);
GrayImage vflip(const GrayImage& img);
BinaryMask hflip(const BinaryMask& mask);
BinaryMask vflip(const BinaryMask& mask);
GrayImage crop(const GrayImage& img, int y0, int x0, int h, int w);
BinaryMask crop(const BinaryMask& mask, int y0, int x0, int h, int w);

// Stacks same-sized images into an N x 1 x H x W tensor.
Tensor to_tensor(std::span<const GrayImage> images, DType dtype);
Tensor to_tensor(const GrayImage& img, DType dtype);
GrayImage from_tensor(const Tensor& t, std::int64_t n = 0, std::int64_t c = 0);

// Binary PGM (P5, maxval 255); written pixels are round(255 * clamp(v, 0, 1)).
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
void write_pgm(const std::filesystem::path& path, const BinaryMask& mask);
// Reads P5 or P2, any maxval up to 65535, scaled to [0, 1].
GrayImage read_pgm(const std::filesystem::path& path);
// Reads binary PPM (P6) into [0, 1].
RgbImage read_ppm(const std::filesystem::path& path);

// 8-bit quantization applied by write_pgm.
GrayImage quantize8(const GrayImage& img);

}  // namespace faintedge
