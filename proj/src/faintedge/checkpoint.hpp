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

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include "faintedge/tensor.hpp"

namespace faintedge {

// Container behind model checkpoints and optimizer state:
//   "NEL1" | u32 LE metadata length | UTF-8 JSON metadata |
//   raw little-endian scalars per registry entry | u32 LE CRC32 of the data.
// The metadata carries "dtype" and "registry": [{name, shape}] in data order.
struct NelFile {
  nlohmann::json metadata;
  std::vector<std::pair<std::string, Tensor>> entries;
};

void write_nel(const std::filesystem::path& path, nlohmann::json metadata,
               const std::vector<std::pair<std::string, Tensor>>& entries);

// Throws FormatError on bad magic, truncation, malformed metadata or CRC mismatch.
NelFile read_nel(const std::filesystem::path& path);

}  // namespace faintedge
