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

#include "faintedge/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

namespace faintedge {
namespace {

constexpr char kMagic[4] = {'N', 'E', 'L', '1'};

void append_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t load_u32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

template <class T>
void append_scalars(std::vector<unsigned char>& out, std::span<const T> values) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  const auto* bytes = reinterpret_cast<const unsigned char*>(values.data());
  out.insert(out.end(), bytes, bytes + values.size_bytes());
}

std::uint32_t crc_of(const unsigned char* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void write_nel(const std::filesystem::path& path, nlohmann::json metadata,
               const std::vector<std::pair<std::string, Tensor>>& entries) {
  if (entries.empty()) throw ContractError("write_nel: nothing to write");
  const DType dtype = entries.front().second.dtype();
  nlohmann::json registry = nlohmann::json::array();
  std::vector<unsigned char> data;
  for (const auto& [name, t] : entries) {
    if (t.dtype() != dtype) throw DimensionError("write_nel: mixed dtypes in one file");
    const auto& s = t.shape();
    registry.push_back({{"name", name}, {"shape", {s.n(), s.c(), s.h(), s.w()}}});
    dispatch(dtype, [&]<class T>(TypeTag<T>) { append_scalars<T>(data, t.data<T>()); });
  }
  metadata["dtype"] = to_string(dtype);
  metadata["registry"] = registry;
  const std::string meta = metadata.dump();

  std::vector<unsigned char> bytes(kMagic, kMagic + 4);
  append_u32(bytes, static_cast<std::uint32_t>(meta.size()));
  bytes.insert(bytes.end(), meta.begin(), meta.end());
  bytes.insert(bytes.end(), data.begin(), data.end());
  append_u32(bytes, crc_of(data.data(), data.size()));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

NelFile read_nel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = " in " + path.string();
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("bad magic" + where);
  const std::size_t meta_len = load_u32(bytes.data() + 4);
  if (bytes.size() < 8 + meta_len + 4) throw FormatError("truncated metadata" + where);

  NelFile file;
  try {
    file.metadata = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(meta_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed metadata: ") + e.what() + where);
  }

  DType dtype;
  std::vector<std::pair<std::string, Shape>> registry;
  try {
    dtype = dtype_from_string(file.metadata.at("dtype").get<std::string>());
    for (const auto& e : file.metadata.at("registry")) {
      const auto dims = e.at("shape").get<std::vector<std::int64_t>>();
      if (dims.size() != 4) throw FormatError("registry shape must have 4 extents" + where);
      registry.emplace_back(e.at("name").get<std::string>(), Shape(dims[0], dims[1], dims[2], dims[3]));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed metadata: ") + e.what() + where);
  } catch (const ContractError& e) {
    throw FormatError(e.what() + where);
  }

  const std::size_t scalar = dtype == DType::f32 ? 4 : 8;
  std::size_t expected = 0;
  for (const auto& [name, shape] : registry) expected += static_cast<std::size_t>(shape.numel()) * scalar;
  const std::size_t data_begin = 8 + meta_len;
  if (bytes.size() != data_begin + expected + 4) throw FormatError("truncated or oversized data section" + where);
  const std::uint32_t stored = load_u32(bytes.data() + data_begin + expected);
  if (stored != crc_of(bytes.data() + data_begin, expected)) throw FormatError("CRC32 mismatch" + where);

  std::size_t offset = data_begin;
  for (const auto& [name, shape] : registry) {
    Tensor t(shape, dtype);
    const std::size_t n = static_cast<std::size_t>(shape.numel()) * scalar;
    dispatch(dtype, [&]<class T>(TypeTag<T>) {
      if (n > 0) std::memcpy(t.mutable_data<T>().data(), bytes.data() + offset, n);
    });
    offset += n;
    file.entries.emplace_back(name, std::move(t));
  }
  return file;
}

}  // namespace faintedge
