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

#include "faintedge/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "faintedge/datagen.hpp"
#include "faintedge/losses.hpp"
#include "faintedge/metrics.hpp"
#include "faintedge/ops.hpp"
#include "faintedge/report.hpp"
#include "faintedge/rng.hpp"

namespace faintedge {

bool GradSuiteResult::passed() const {
  return std::all_of(cases.begin(), cases.end(), [](const auto& c) { return c.report.passed(); });
}

std::string GradSuiteResult::to_csv() const {
  std::string out = "case,input,checked,max_rel_error,passed\n";
  for (const auto& c : cases)
    for (const auto& e : c.report.entries)
      out += csv_line({c.name, e.name, std::to_string(e.checked), format_number(e.max_relative_error),
                       e.passed ? "1" : "0"});
  return out;
}

namespace {

constexpr std::uint64_t kSuiteKey = 0x96AD;
constexpr std::uint64_t kSweepKey = 0x5EE9;
constexpr std::uint64_t kBenchKey = 0xBE9C;

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo, double hi, bool grad = true) {
  std::vector<double> v(static_cast<std::size_t>(shape.numel()));
  for (double& x : v) x = uniform(rng, lo, hi);
  Tensor t = Tensor::from_values(shape, v, DType::f64);
  if (grad) t.set_requires_grad(true);
  return t;
}

// Values bounded away from zero, so no ReLU kink lies within one step.
Tensor away_from_zero(Shape shape, std::mt19937_64& rng) {
  std::vector<double> v(static_cast<std::size_t>(shape.numel()));
  for (double& x : v) x = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * uniform(rng, 0.1, 1.0);
  return Tensor::from_values(shape, v, DType::f64).set_requires_grad(true);
}

// Distinct values 0.01 apart in random order: pooling winners cannot swap.
Tensor distinct_values(Shape shape, std::mt19937_64& rng) {
  std::vector<double> v(static_cast<std::size_t>(shape.numel()));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.01 * static_cast<double>(i) - 0.3;
  for (std::size_t i = v.size() - 1; i > 0; --i)
    std::swap(v[i], v[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(i)))]);
  return Tensor::from_values(shape, v, DType::f64).set_requires_grad(true);
}

// Contracts an output with fixed random weights so every output element
// contributes a distinct amount.
struct Readout {
  Tensor weights;
  Tensor operator()(const Tensor& t) const { return sum(mul(t, weights)); }
};

Readout readout_for(Shape shape, std::mt19937_64& rng) { return {random_tensor(shape, rng, -1.0, 1.0, false)}; }

}  // namespace

GradSuiteResult gradcheck_suite(const GradSuiteOptions& options) {
  GradSuiteResult result;
  GradCheckOptions gc;
  gc.step = options.step;
  gc.tolerance = options.tolerance;

  for (std::uint64_t seed : options.seeds) {
    auto rng = derive_stream(seed, {kSuiteKey});
    auto add_case = [&](const std::string& op, const GraphProgram& program, std::vector<Tensor> inputs,
                        std::vector<std::string> names, const GradCheckOptions& opts) {
      result.cases.push_back({op + "/seed=" + std::to_string(seed), grad_check(program, std::move(inputs), opts, std::move(names))});
    };
    auto check = [&](const std::string& op, const GraphProgram& program, std::vector<Tensor> inputs,
                     std::vector<std::string> names) { add_case(op, program, std::move(inputs), std::move(names), gc); };

    {
      const Readout r = readout_for(Shape(2, 4, 6, 6), rng);
      check("conv2d_s1p1",
            [r](const std::vector<Tensor>& in) { return r(conv2d(in[0], in[1], in[2], 1, 1)); },
            {random_tensor(Shape(2, 3, 6, 6), rng, -1, 1), random_tensor(Shape(4, 3, 3, 3), rng, -1, 1),
             random_tensor(Shape(1, 1, 1, 4), rng, -1, 1)},
            {"input", "weight", "bias"});
    }
    {
      const Readout r = readout_for(Shape(1, 3, 3, 3), rng);
      check("conv2d_s2p0", [r](const std::vector<Tensor>& in) { return r(conv2d(in[0], in[1], Tensor(), 2, 0)); },
            {random_tensor(Shape(1, 2, 7, 7), rng, -1, 1), random_tensor(Shape(3, 2, 3, 3), rng, -1, 1)},
            {"input", "weight"});
    }
    {
      const Readout r = readout_for(Shape(1, 2, 4, 4), rng);
      check("conv2d_s2p1",
            [r](const std::vector<Tensor>& in) { return r(conv2d(in[0], in[1], in[2], 2, 1)); },
            {random_tensor(Shape(1, 3, 7, 7), rng, -1, 1), random_tensor(Shape(2, 3, 3, 3), rng, -1, 1),
             random_tensor(Shape(1, 1, 1, 2), rng, -1, 1)},
            {"input", "weight", "bias"});
    }
    {
      const Readout r = readout_for(Shape(2, 3, 4, 4), rng);
      check("relu", [r](const std::vector<Tensor>& in) { return r(relu(in[0])); },
            {away_from_zero(Shape(2, 3, 4, 4), rng)}, {"input"});
    }
    {
      const Readout r = readout_for(Shape(2, 3, 4, 4), rng);
      check("sigmoid", [r](const std::vector<Tensor>& in) { return r(sigmoid(in[0])); },
            {random_tensor(Shape(2, 3, 4, 4), rng, -4, 4)}, {"input"});
    }
    {
      const Readout r = readout_for(Shape(1, 2, 3, 3), rng);
      check("maxpool2", [r](const std::vector<Tensor>& in) { return r(maxpool2(in[0])); },
            {distinct_values(Shape(1, 2, 6, 6), rng)}, {"input"});
    }
    {
      const Readout r = readout_for(Shape(1, 2, 8, 10), rng);
      check("upsample2", [r](const std::vector<Tensor>& in) { return r(upsample2(in[0])); },
            {random_tensor(Shape(1, 2, 4, 5), rng, -1, 1)}, {"input"});
    }
    {
      const Readout r = readout_for(Shape(1, 5, 3, 3), rng);
      check("concat", [r](const std::vector<Tensor>& in) { return r(concat_channels(in[0], in[1])); },
            {random_tensor(Shape(1, 2, 3, 3), rng, -1, 1), random_tensor(Shape(1, 3, 3, 3), rng, -1, 1)},
            {"a", "b"});
    }
    const Shape es(2, 2, 3, 3);
    for (auto kind : {ElementwiseKind::add, ElementwiseKind::sub, ElementwiseKind::mul, ElementwiseKind::div}) {
      static const char* names[] = {"add", "sub", "mul", "div"};
      const Readout r = readout_for(es, rng);
      // Divisors stay at least 0.5 away from zero.
      std::vector<double> bv = (kind == ElementwiseKind::div ? away_from_zero(es, rng) : random_tensor(es, rng, -1, 1)).to_vector();
      if (kind == ElementwiseKind::div)
        for (double& v : bv) v += v > 0 ? 0.4 : -0.4;
      check(names[static_cast<int>(kind)],
            [r, kind](const std::vector<Tensor>& in) { return r(elementwise(kind, in[0], in[1])); },
            {random_tensor(es, rng, -1, 1), Tensor::from_values(es, bv, DType::f64).set_requires_grad(true)},
            {"a", "b"});
    }
    {
      const Readout r = readout_for(es, rng);
      check("square", [r](const std::vector<Tensor>& in) { return r(square(in[0])); },
            {random_tensor(es, rng, -1, 1)}, {"input"});
    }
    {
      const Readout r = readout_for(es, rng);
      const double factor = uniform(rng, -2, 2), offset = uniform(rng, -1, 1);
      check("affine", [r, factor, offset](const std::vector<Tensor>& in) { return r(affine(in[0], factor, offset)); },
            {random_tensor(es, rng, -1, 1)}, {"input"});
    }
    {
      const Readout r = readout_for(es, rng);
      check("sum", [r](const std::vector<Tensor>& in) { return scale(sum(in[0]), 0.7); },
            {random_tensor(es, rng, -1, 1)}, {"input"});
      check("mean", [r](const std::vector<Tensor>& in) { return mean(mul(in[0], r.weights)); },
            {random_tensor(es, rng, -1, 1)}, {"input"});
    }
    const Shape ls(2, 1, 8, 8);
    {
      std::vector<double> lab(static_cast<std::size_t>(ls.numel()));
      for (double& v : lab) v = uniform01(rng) < 0.3 ? 1.0 : 0.0;
      const Tensor label = Tensor::from_values(ls, lab, DType::f64);
      check("dice_loss", [label](const std::vector<Tensor>& in) { return dice_loss(in[0], label).value; },
            {random_tensor(ls, rng, 0.05, 0.95)}, {"y"});
    }
    check("l2_loss", [](const std::vector<Tensor>& in) { return l2_loss(in[0], in[1]).value; },
          {random_tensor(ls, rng, 0, 1), random_tensor(ls, rng, 0, 1)}, {"y", "target"});
    {
      const Tensor clean = random_tensor(ls, rng, 0, 1, false);
      check("edge_loss", [clean](const std::vector<Tensor>& in) { return edge_preservation_loss(in[0], clean).value; },
            {random_tensor(ls, rng, 0, 1)}, {"denoised"});
      const double lambda = uniform(rng, 0.1, 2.0);
      check("combined_loss",
            [clean, lambda](const std::vector<Tensor>& in) { return combined_denoise_loss(in[0], clean, lambda).value; },
            {random_tensor(ls, rng, 0, 1)}, {"denoised"});
    }

    if (options.include_unet) {
      Model model = Model::build(UNetSpec::make(1, options.unet_width), seed, DType::f64);
      const int s = options.unet_size;
      Tensor x = random_tensor(Shape(1, 1, s, s), rng, 0, 1);
      std::vector<double> lab(static_cast<std::size_t>(s) * s);
      for (double& v : lab) v = uniform01(rng) < 0.2 ? 1.0 : 0.0;
      const Tensor label = Tensor::from_values(Shape(1, 1, s, s), lab, DType::f64);
      std::vector<Tensor> inputs{x};
      std::vector<std::string> names{"input"};
      for (std::size_t i = 0; i < model.parameters().size(); ++i) {
        inputs.push_back(model.parameters()[i]);
        names.push_back(model.spec().registry[i].name);
      }
      GradCheckOptions uo = gc;
      uo.tolerance = options.unet_tolerance;
      uo.max_entries_per_input = options.unet_entries_per_tensor;
      uo.sample_seed = seed;
      uo.min_abs_gradient = options.unet_min_abs_gradient;
      // Parameters are shared with `model`, so perturbing inputs[i] in place
      // is seen by its forward pass.
      add_case("unet_dice", [&model, label](const std::vector<Tensor>& in) {
        return dice_loss(model.forward(in[0]), label).value;
      }, inputs, names, uo);
    }
  }
  return result;
}

std::vector<SweepRow> snr_sweep(const Predictor& model, const GrayImage& pattern, const SweepOptions& options) {
  if (options.snrs.empty()) throw ContractError("snr_sweep: empty snr list");
  if (options.iterations < 1) throw ContractError("snr_sweep: iterations must be >= 1");
  const BinaryMask labels = extract_labels(pattern);
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < options.snrs.size(); ++i) {
    const double snr = options.snrs[i];
    std::vector<double> fm, fc;
    for (int r = 0; r < options.iterations; ++r) {
      auto rng = derive_stream(options.seed, {kSweepKey, i, static_cast<std::uint64_t>(r)});
      const GrayImage noisy = apply_noise_model(pattern, snr, rng);
      fm.push_back(strict_f_measure(model(noisy), labels, options.threshold).f);
      fc.push_back(strict_f_measure(canny(noisy, options.canny), labels).f);
    }
    for (auto [name, v] : {std::pair{"model", &fm}, std::pair{"canny", &fc}}) {
      double mean = 0.0, var = 0.0;
      for (double x : *v) mean += x;
      mean /= static_cast<double>(v->size());
      for (double x : *v) var += (x - mean) * (x - mean);
      rows.push_back({snr, name, mean, std::sqrt(var / static_cast<double>(v->size()))});
    }
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "snr,method,f_mean,f_std\n";
  for (const auto& r : rows)
    out += csv_line({format_number(r.snr), r.method, format_number(r.f_mean), format_number(r.f_std)});
  return out;
}

std::string sweep_to_svg(const std::vector<SweepRow>& rows) {
  std::vector<Series> series;
  for (const auto& r : rows) {
    auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) { return s.name == r.method; });
    if (it == series.end()) {
      series.push_back({r.method, {}, {}});
      it = series.end() - 1;
    }
    it->x.push_back(r.snr);
    it->y.push_back(r.f_mean);
  }
  return svg_line_chart(series, "F-measure vs SNR", "SNR", "mean strict F");
}

std::vector<BenchRow> bench_forward(const Model& model, const std::vector<int>& sizes, int repeat,
                                    std::uint64_t seed) {
  if (repeat < 1) throw ContractError("bench: repeat must be >= 1");
  if (sizes.empty()) throw ContractError("bench: no sizes given");
  std::vector<BenchRow> rows;
  NoGradGuard no_grad;
  for (int size : sizes) {
    if (size <= 0 || size % UNetSpec::kDivisor != 0)
      throw GeometryError("bench: size " + std::to_string(size) + " is not a positive multiple of 8");
    auto rng = derive_stream(seed, {kBenchKey, static_cast<std::uint64_t>(size)});
    std::vector<double> v(static_cast<std::size_t>(size) * size * model.spec().in_channels);
    for (double& x : v) x = uniform01(rng);
    const Tensor input = Tensor::from_values(Shape(1, model.spec().in_channels, size, size), v, model.dtype());
    model.forward(input);
    std::vector<double> times;
    for (int r = 0; r < repeat; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      model.forward(input);
      times.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(times.begin(), times.end());
    const std::size_t n = times.size();
    rows.push_back({size, n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2])});
  }
  return rows;
}

std::string bench_to_csv(const std::vector<BenchRow>& rows) {
  std::string out = "size,median_ms\n";
  for (const auto& r : rows) out += csv_line({std::to_string(r.size), format_number(r.median_ms)});
  return out;
}

}  // namespace faintedge
