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

#include "faintedge/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace faintedge {

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(pixels.begin(), pixels.end(), std::uint8_t{1}));
}

GrayImage to_gray(const BinaryMask& mask) {
  GrayImage img(mask.height, mask.width);
  for (std::size_t i = 0; i < mask.size(); ++i) img.pixels[i] = mask.pixels[i] ? 1.0 : 0.0;
  return img;
}

BinaryMask threshold(const GrayImage& img, double level) {
  BinaryMask m(img.height, img.width);
  for (std::size_t i = 0; i < img.size(); ++i) m.pixels[i] = img.pixels[i] >= level ? 1 : 0;
  return m;
}

bool is_binary(const GrayImage& img) {
  return std::all_of(img.pixels.begin(), img.pixels.end(), [](double v) { return v == 0.0 || v == 1.0; });
}

namespace {

template <class Img>
Img flip_h(const Img& src) {
  Img out = src;
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) out.at(y, x) = src.at(y, src.width - 1 - x);
  return out;
}

template <class Img>
Img flip_v(const Img& src) {
  Img out = src;
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) out.at(y, x) = src.at(src.height - 1 - y, x);
  return out;
}

template <class Img>
Img crop_impl(const Img& src, int y0, int x0, int h, int w) {
  if (y0 < 0 || x0 < 0 || h < 0 || w < 0 || y0 + h > src.height || x0 + w > src.width)
    throw GeometryError("crop window outside image");
  Img out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(y, x) = src.at(y0 + y, x0 + x);
  return out;
}

}  // namespace

GrayImage hflip(const GrayImage& img) { return flip_h(img); }
GrayImage vflip(const GrayImage& img) { return flip_v(img); }
BinaryMask hflip(const BinaryMask& mask) { return flip_h(mask); }
BinaryMask vflip(const BinaryMask& mask) { return flip_v(mask); }
GrayImage crop(const GrayImage& img, int y0, int x0, int h, int w) { return crop_impl(img, y0, x0, h, w); }
BinaryMask crop(const BinaryMask& mask, int y0, int x0, int h, int w) { return crop_impl(mask, y0, x0, h, w); }

Tensor to_tensor(std::span<const GrayImage> images, DType dtype) {
  if (images.empty()) throw ContractError("to_tensor: no images");
  const int h = images[0].height;
  const int w = images[0].width;
  Tensor t(Shape(static_cast<std::int64_t>(images.size()), 1, h, w), dtype);
  dispatch(dtype, [&]<class T>(TypeTag<T>) {
    auto d = t.mutable_data<T>();
    std::size_t k = 0;
    for (const auto& img : images) {
      if (img.height != h || img.width != w) throw DimensionError("to_tensor: images differ in size");
      for (double v : img.pixels) d[k++] = static_cast<T>(v);
    }
  });
  return t;
}

Tensor to_tensor(const GrayImage& img, DType dtype) {
  return to_tensor(std::span<const GrayImage>(&img, 1), dtype);
}

GrayImage from_tensor(const Tensor& t, std::int64_t n, std::int64_t c) {
  const auto& s = t.shape();
  if (n >= s.n() || c >= s.c()) throw DimensionError("from_tensor: index outside " + s.str());
  GrayImage img(static_cast<int>(s.h()), static_cast<int>(s.w()));
  const std::size_t offset = static_cast<std::size_t>((n * s.c() + c) * s.plane());
  dispatch(t.dtype(), [&]<class T>(TypeTag<T>) {
    auto d = t.data<T>();
    for (std::size_t i = 0; i < img.size(); ++i) img.pixels[i] = static_cast<double>(d[offset + i]);
  });
  return img;
}

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

int parse_int(const std::string& tok, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw FormatError("bad header value '" + tok + "' in " + path.string());
  }
}

struct NetpbmHeader {
  std::string magic;
  int width = 0, height = 0, maxval = 0;
};

NetpbmHeader read_header(std::istream& in, const std::filesystem::path& path) {
  NetpbmHeader h;
  h.magic = next_token(in);
  h.width = parse_int(next_token(in), path);
  h.height = parse_int(next_token(in), path);
  h.maxval = parse_int(next_token(in), path);
  if (h.maxval > 65535) throw FormatError("maxval above 65535 in " + path.string());
  return h;
}

std::vector<double> read_samples(std::istream& in, std::size_t count, int maxval,
                                 const std::filesystem::path& path) {
  std::vector<double> out(count);
  const std::size_t bytes = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(count * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw FormatError("truncated pixel data in " + path.string());
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned v = bytes == 1 ? raw[i] : (unsigned{raw[2 * i]} << 8) | raw[2 * i + 1];
    out[i] = static_cast<double>(v) / maxval;
  }
  return out;
}

void write_bytes(const std::filesystem::path& path, int h, int w, const std::vector<std::uint8_t>& px) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

GrayImage quantize8(const GrayImage& img) {
  GrayImage out = img;
  for (double& v : out.pixels) v = to_byte(v) / 255.0;
  return out;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::vector<std::uint8_t> px(img.size());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = to_byte(img.pixels[i]);
  write_bytes(path, img.height, img.width, px);
}

void write_pgm(const std::filesystem::path& path, const BinaryMask& mask) {
  std::vector<std::uint8_t> px(mask.size());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = mask.pixels[i] ? 255 : 0;
  write_bytes(path, mask.height, mask.width, px);
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const auto h = read_header(in, path);
  GrayImage img(h.height, h.width);
  if (h.magic == "P5") {
    img.pixels = read_samples(in, img.size(), h.maxval, path);
  } else if (h.magic == "P2") {
    for (auto& v : img.pixels) {
      const auto tok = next_token(in);
      if (tok.empty()) throw FormatError("truncated pixel data in " + path.string());
      v = static_cast<double>(std::stoi(tok)) / h.maxval;
    }
  } else {
    throw FormatError(path.string() + " is not a PGM file (magic '" + h.magic + "')");
  }
  return img;
}

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const auto h = read_header(in, path);
  if (h.magic != "P6") throw FormatError(path.string() + " is not a binary PPM file");
  RgbImage img;
  img.height = h.height;
  img.width = h.width;
  img.pixels = read_samples(in, static_cast<std::size_t>(h.height) * h.width * 3, h.maxval, path);
  return img;
}

}  // namespace faintedge
