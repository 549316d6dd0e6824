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

#include "faintedge/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace faintedge {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

bool GradCheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

double GradCheckReport::max_relative_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.max_relative_error);
  return worst;
}

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os.precision(3);
  for (const auto& e : entries) {
    os << (e.passed ? "ok   " : "FAIL ") << e.name << " max_rel=" << std::scientific
       << e.max_relative_error << " checked=" << e.checked;
    if (e.skipped_branch) os << " branch_skips=" << e.skipped_branch;
    if (e.skipped_small) os << " below_floor=" << e.skipped_small;
    if (!e.passed)
      os << " worst[" << e.worst_index << "] analytic=" << e.analytic_at_worst
         << " numeric=" << e.numeric_at_worst;
    os << '\n';
  }
  return os.str();
}

GradCheckReport grad_check(const GraphProgram& program, std::vector<Tensor> inputs,
                           const GradCheckOptions& options, std::vector<std::string> names) {
  for (auto& in : inputs) {
    if (in.dtype() != DType::f64) throw ContractError("grad_check requires f64 inputs");
    if (!in.is_leaf()) throw ContractError("grad_check inputs must be leaves");
    in.set_requires_grad(true);
    in.zero_grad();
  }

  Tensor loss = program(inputs);
  loss.backward();
  std::vector<std::vector<double>> analytic;
  for (auto& in : inputs) {
    analytic.push_back(in.has_grad() ? in.grad_vector()
                                     : std::vector<double>(static_cast<std::size_t>(in.numel()), 0.0));
    in.zero_grad();
  }

  std::uint64_t branch = 0;
  auto evaluate = [&]() {
    NoGradGuard guard;
    BranchTrace trace;
    const double v = program(inputs).item();
    branch = trace.value();
    return v;
  };
  evaluate();
  const std::uint64_t base_branch = branch;

  GradCheckReport report;
  std::mt19937_64 rng(options.sample_seed);
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    GradCheckEntry entry;
    entry.name = t < names.size() ? names[t] : "input" + std::to_string(t);
    auto values = inputs[t].mutable_data<double>();

    std::vector<std::size_t> indices(values.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    if (options.max_entries_per_input > 0 && indices.size() > options.max_entries_per_input) {
      std::shuffle(indices.begin(), indices.end(), rng);
      indices.resize(options.max_entries_per_input);
      std::sort(indices.begin(), indices.end());
    }

    for (std::size_t i : indices) {
      if (options.skip && options.skip(t, i)) continue;
      const double original = values[i];
      values[i] = original + options.step;
      const double plus = evaluate();
      const std::uint64_t plus_branch = branch;
      values[i] = original - options.step;
      const double minus = evaluate();
      values[i] = original;
      if (options.skip_branch_changes && (plus_branch != base_branch || branch != base_branch)) {
        ++entry.skipped_branch;
        continue;
      }
      const double numeric = (plus - minus) / (2.0 * options.step);
      if (std::max(std::abs(numeric), std::abs(analytic[t][i])) < options.min_abs_gradient) {
        ++entry.skipped_small;
        continue;
      }
      const double err = relative_error(analytic[t][i], numeric);
      ++entry.checked;
      if (entry.checked == 1 || err > entry.max_relative_error) {
        entry.max_relative_error = err;
        entry.worst_index = i;
        entry.analytic_at_worst = analytic[t][i];
        entry.numeric_at_worst = numeric;
      }
    }
    entry.passed = entry.max_relative_error <= options.tolerance;
    report.entries.push_back(entry);
  }
  return report;
}

}  // namespace faintedge
