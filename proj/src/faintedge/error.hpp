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

#include <stdexcept>
#include <string>

namespace faintedge {

enum class ErrorCode {
  dimension = 1,
  geometry,
  contract,
  state,
  format,
  compatibility,
  io,
  numeric,
};

const char* to_string(ErrorCode code);

// Base for every error raised by the library. The code survives the trip
// through the C API as a status value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define FAINTEDGE_DEFINE_ERROR(Name, Code)                         \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(Code, what) {}  \
  };

FAINTEDGE_DEFINE_ERROR(DimensionError, ErrorCode::dimension)
FAINTEDGE_DEFINE_ERROR(GeometryError, ErrorCode::geometry)
FAINTEDGE_DEFINE_ERROR(ContractError, ErrorCode::contract)
FAINTEDGE_DEFINE_ERROR(StateError, ErrorCode::state)
FAINTEDGE_DEFINE_ERROR(FormatError, ErrorCode::format)
FAINTEDGE_DEFINE_ERROR(CompatibilityError, ErrorCode::compatibility)
FAINTEDGE_DEFINE_ERROR(IoError, ErrorCode::io)
FAINTEDGE_DEFINE_ERROR(NumericError, ErrorCode::numeric)

#undef FAINTEDGE_DEFINE_ERROR

}  // namespace faintedge
