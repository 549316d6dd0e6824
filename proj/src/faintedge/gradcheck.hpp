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
#include <functional>
#include <string>
#include <vector>

#include "faintedge/tensor.hpp"

namespace faintedge {

// A graph program mapping leaf inputs to a scalar.
using GraphProgram = std::function<Tensor(const std::vector<Tensor>&)>;

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-5;
  // 0 checks every entry; otherwise a seeded sample of this many per input.
  std::size_t max_entries_per_input = 0;
  std::uint64_t sample_seed = 0;
  // Return true to leave an entry out.
  std::function<bool(std::size_t input, std::size_t index)> skip;
  // Leave out entries whose +/- step moves a ReLU or pooling branch: the
  // central difference then straddles a kink and is no oracle.
  bool skip_branch_changes = true;
  // Entries where both the analytic and the numeric value are below this are
  // not scored. At step 1e-5 double roundoff limits the numeric estimate to
  // roughly 1e-11 absolute.
  double min_abs_gradient = 0.0;
};

struct GradCheckEntry {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_branch = 0;
  std::size_t skipped_small = 0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  bool passed() const;
  double max_relative_error() const;
  std::string summary() const;
};

// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

// Compares backward() against central differences. Inputs must be f64 leaves;
// they are perturbed in place and restored. `names` labels report entries.
GradCheckReport grad_check(const GraphProgram& program, std::vector<Tensor> inputs,
                           const GradCheckOptions& options = {},
                           std::vector<std::string> names = {});

}  // namespace faintedge
