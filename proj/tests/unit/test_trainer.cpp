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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "faintedge/trainer.hpp"
#include "faintedge/unet.hpp"
#include "test_util.hpp"

using namespace faintedge;
namespace fs = std::filesystem;

namespace {

Dataset small_edges(std::uint64_t seed = 1) {
  EdgeDatasetConfig cfg;
  cfg.base_count = 4;
  cfg.height = cfg.width = 16;
  cfg.snrs = {2.0};
  cfg.train_fraction = 0.75;
  cfg.seed = seed;
  return build_edge_dataset(cfg);
}

Dataset small_denoise() {
  DenoiseDatasetConfig cfg;
  cfg.sigmas = {25.0};
  cfg.train_fraction = 0.75;
  return build_denoise_dataset(generate_natural_images(4, 16, 16, 2), cfg);
}

TrainConfig quick(Task task, int epochs) {
  TrainConfig c;
  c.task = task;
  c.epochs = epochs;
  c.batch = 2;
  c.crop = 0;
  c.seed = 5;
  c.optimizer.lr = 1e-3;
  return c;
}

bool same_row(const LogRow& a, const LogRow& b) {
  auto eq = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
  return a.epoch == b.epoch && a.step == b.step && eq(a.loss, b.loss) && eq(a.loss_l2, b.loss_l2) &&
         eq(a.loss_edge, b.loss_edge) && eq(a.eval_metric, b.eval_metric);
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("faintedge_trainer_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(TrainConfig, Validation) {
  TrainConfig c;
  c.crop = 12;
  EXPECT_THROW(c.validate(), GeometryError);
  c.crop = 16;
  c.epochs = 0;
  EXPECT_THROW(c.validate(), ContractError);
  c.epochs = 1;
  c.batch = 0;
  EXPECT_THROW(c.validate(), ContractError);
  c.batch = 1;
  EXPECT_NO_THROW(c.validate());
  const TrainConfig back = TrainConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
}

TEST(Train, ZeroLearningRateKeepsEvalMetric) {
  const Dataset ds = small_edges();
  Model m = Model::build(UNetSpec::make(1, 2), 1);
  TrainConfig c = quick(Task::edges, 3);
  c.optimizer.lr = 0.0;
  const auto before = m.parameters()[0].to_vector();
  const TrainResult r = train(c, ds, m);
  ASSERT_EQ(r.log.size(), 3u);
  EXPECT_EQ(r.log[0].eval_metric, r.log[1].eval_metric);
  EXPECT_EQ(r.log[1].eval_metric, r.log[2].eval_metric);
  EXPECT_EQ(m.parameters()[0].to_vector(), before);
}

TEST(Train, BitwiseDeterministic) {
  const Dataset ds = small_edges();
  Model a = Model::build(UNetSpec::make(1, 2), 1), b = Model::build(UNetSpec::make(1, 2), 1);
  const auto ra = train(quick(Task::edges, 2), ds, a);
  const auto rb = train(quick(Task::edges, 2), ds, b);
  for (std::size_t i = 0; i < ra.log.size(); ++i) EXPECT_TRUE(same_row(ra.log[i], rb.log[i]));
  for (std::size_t i = 0; i < a.parameters().size(); ++i)
    EXPECT_TRUE(fe_test::bitwise_equal(a.parameters()[i], b.parameters()[i]));
}

TEST(Train, ResumeReproducesUninterruptedRun) {
  const Dataset ds = small_edges();
  const fs::path dir = temp_dir("resume");

  Model full = Model::build(UNetSpec::make(1, 2), 3);
  TrainConfig c = quick(Task::edges, 4);
  c.checkpoint = (dir / "full.nel").string();
  const TrainResult whole = train(c, ds, full);

  Model part = Model::build(UNetSpec::make(1, 2), 3);
  TrainConfig first = c;
  first.checkpoint = (dir / "part.nel").string();
  int seen = 0;
  train(first, ds, part, [&](const LogRow&) { return ++seen < 2; });
  ASSERT_EQ(seen, 2);

  Model resumed = load_checkpoint(first.checkpoint);
  const TrainResult rest = resume(first, ds, resumed);
  ASSERT_EQ(rest.log.size(), 2u);
  EXPECT_TRUE(same_row(rest.log[0], whole.log[2]));
  EXPECT_TRUE(same_row(rest.log[1], whole.log[3]));
  for (std::size_t i = 0; i < full.parameters().size(); ++i)
    EXPECT_TRUE(fe_test::bitwise_equal(full.parameters()[i], resumed.parameters()[i]));
  EXPECT_TRUE(fs::exists(dir / "full.nel.best"));
  EXPECT_TRUE(fs::exists(dir / "full.nel.state"));
}

TEST(Train, NonFiniteLossAborts) {
  const Dataset ds = small_edges();
  Model m = Model::build(UNetSpec::make(1, 2), 1);
  m.parameters().back().mutable_buffer().set(0, std::numeric_limits<double>::quiet_NaN());
  try {
    train(quick(Task::edges, 1), ds, m);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("epoch 1"), std::string::npos) << what;
    EXPECT_NE(what.find("batch"), std::string::npos) << what;
  }
}

TEST(Train, TaskMismatchRejected) {
  Model m = Model::build(UNetSpec::make(1, 2), 1);
  EXPECT_THROW(train(quick(Task::denoise, 1), small_edges(), m), ContractError);
}

TEST(Train, DenoiseLambdaChangesTrajectoryAndBothReduceL2) {
  const Dataset ds = small_denoise();
  TrainConfig c = quick(Task::denoise, 12);
  c.batch = 3;  // the whole training split, so epoch losses are comparable
  c.resample_noise = false;
  c.vflip = false;
  c.optimizer.lr = 3e-3;
  Model with = Model::build(UNetSpec::make(1, 2), 7), without = Model::build(UNetSpec::make(1, 2), 7);
  const auto r1 = train(c, ds, with);
  c.lambda_edge = 0.0;
  const auto r0 = train(c, ds, without);
  EXPECT_NE(with.parameters()[0].to_vector(), without.parameters()[0].to_vector());
  EXPECT_LT(r1.log.back().loss_l2, r1.log.front().loss_l2);
  EXPECT_LT(r0.log.back().loss_l2, r0.log.front().loss_l2);
  EXPECT_EQ(r0.log.back().loss, r0.log.back().loss_l2);
  EXPECT_FALSE(std::isnan(r1.log.back().loss_edge));
}

TEST(LogCsv, HeaderAndMissingCells) {
  LogRow row;
  row.epoch = 1;
  row.step = 2;
  row.loss = 0.5;
  const std::string csv = log_to_csv({row});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,step,loss,loss_l2,loss_edge,eval_metric,wall_ms");
  EXPECT_NE(csv.find("1,2,0.5,,,,"), std::string::npos);
}

TEST(Evaluate, PerfectPredictorScoresOne) {
  const Dataset ds = small_edges();
  const auto test = ds.split(Split::test);
  std::map<const GrayImage*, GrayImage> truth;
  const MetricsReport r = evaluate(
      [&](const GrayImage& in) {
        for (const Sample* s : test)
          if (s->input.pixels == in.pixels) return to_gray(s->label);
        return GrayImage(in.height, in.width);
      },
      test, Task::edges);
  EXPECT_EQ(r.primary(), 1.0);
}

TEST(Evaluate, ConstantHalfDetectsEverything) {
  const Dataset ds = small_edges();
  const auto test = ds.split(Split::test);
  const MetricsReport r = evaluate([](const GrayImage& in) { return GrayImage(in.height, in.width, 0.5); }, test,
                                   Task::edges);
  for (const auto& row : r.rows) {
    if (row.kind != "image") continue;
    const Sample* s = nullptr;
    for (const Sample* t : test)
      if (t->id == row.id) s = t;
    ASSERT_NE(s, nullptr);
    const double d = static_cast<double>(s->label.count()) / static_cast<double>(s->label.size());
    EXPECT_NEAR(row.f, 2.0 * d / (1.0 + d), 1e-12);
    EXPECT_EQ(row.recall, 1.0);
  }
  EXPECT_THROW(evaluate([](const GrayImage& in) { return in; }, {}, Task::edges), ContractError);
}

TEST(Evaluate, ReportIsDeterministic) {
  const Dataset ds = small_edges();
  const Model m = Model::build(UNetSpec::make(1, 2), 1);
  EvalOptions o;
  o.redraws = 3;
  o.seed = 4;
  const auto a = evaluate(m, ds.split(Split::test), Task::edges, o).to_csv();
  const auto b = evaluate(m, ds.split(Split::test), Task::edges, o).to_csv();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), "kind,id,snr,count,precision,recall,f");
}

TEST(Evaluate, DenoiseColumns) {
  const Dataset ds = small_denoise();
  const auto test = ds.split(Split::test);
  const MetricsReport r = evaluate([](const GrayImage& in) { return in; }, test, Task::denoise);
  const auto& all = r.overall();
  EXPECT_NEAR(all.psnr, all.psnr_noisy, 1e-12);
  const std::string csv = r.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "kind,id,sigma,count,psnr_noisy,psnr,ssim");
}

TEST(Train, OverfitRunningMeanDoesNotIncrease) {
  EdgeDatasetConfig dc;
  dc.base_count = 4;
  dc.height = dc.width = 32;
  dc.snrs = {2.0};
  dc.hflip = false;
  dc.pure_noise_fraction = 0.0;
  Dataset ds = build_edge_dataset(dc);
  for (auto& s : ds.samples) s.split = Split::train;
  TrainConfig c = quick(Task::edges, 10);
  c.batch = 4;
  c.resample_noise = false;
  c.vflip = false;
  c.optimizer.lr = 1e-4;
  Model m = Model::build(UNetSpec::make(1, 4), 2);
  const TrainResult r = train(c, ds, m);
  double total = 0.0;
  for (std::size_t k = 0; k < r.log.size(); ++k) {
    if (k > 0) {
      EXPECT_LE(r.log[k].loss, total / static_cast<double>(k)) << "epoch " << k + 1;
    }
    total += r.log[k].loss;
  }
}

TEST(Train, InputNormFitsTrainSplitStatistics) {
  const Dataset ds = small_edges();
  std::vector<double> px;
  for (const Sample* s : ds.split(Split::train)) px.insert(px.end(), s->input.pixels.begin(), s->input.pixels.end());
  double mean = 0.0;
  for (double v : px) mean += v;
  mean /= static_cast<double>(px.size());
  double var = 0.0;
  for (double v : px) var += (v - mean) * (v - mean);
  var /= static_cast<double>(px.size());

  Model fitted = Model::build(UNetSpec::make(1, 2), 1);
  TrainConfig c = quick(Task::edges, 1);
  train(c, ds, fitted);
  EXPECT_NEAR(fitted.input_shift(), mean, 1e-12);
  EXPECT_NEAR(fitted.input_scale(), 1.0 / std::sqrt(var), 1e-9);

  Model preset = Model::build(UNetSpec::make(1, 2), 1);
  preset.set_input_norm(0.25, 2.0);
  train(c, ds, preset);
  EXPECT_EQ(preset.input_shift(), 0.25);
  EXPECT_EQ(preset.input_scale(), 2.0);

  Model raw = Model::build(UNetSpec::make(1, 2), 1);
  c.standardize_input = false;
  train(c, ds, raw);
  EXPECT_FALSE(raw.has_input_norm());
}
