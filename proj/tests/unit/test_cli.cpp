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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args, const fs::path& dir) {
  const fs::path out_file = dir / "stdout.txt";
  const std::string cmd = "cd '" + dir.string() + "' && '" FAINTEDGE_CLI "' " + args + " > '" +
                          out_file.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  Outcome r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("faintedge_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  const fs::path dir = fresh_dir("usage");
  EXPECT_EQ(run("no-such-command", dir).code, 2);
  EXPECT_EQ(run("gen-edges --out d --no-such-flag 1", dir).code, 2);
  EXPECT_EQ(run("gen-edges --out d --base ten", dir).code, 2);
  EXPECT_EQ(run("--help", dir).code, 0);
}

TEST(Cli, GenerateCountsAndSidecar) {
  const fs::path dir = fresh_dir("gen");
  const Outcome r = run("gen-edges --out data --base 10 --size 32 --seed 3", dir);
  ASSERT_EQ(r.code, 0) << r.out;
  const auto manifest = nlohmann::json::parse(std::ifstream(dir / "data" / "manifest.json"));
  std::size_t core = 0;
  for (const auto& s : manifest.at("samples"))
    if (!s.at("pure_noise").get<bool>()) ++core;
  EXPECT_EQ(core, 120u);
  const auto sidecar = nlohmann::json::parse(std::ifstream(dir / "data" / "run-config.json"));
  EXPECT_EQ(sidecar.at("command"), "gen-edges");
  EXPECT_EQ(sidecar.at("config").at("seed"), 3);
}

TEST(Cli, ReplayReproducesOutputs) {
  const fs::path dir = fresh_dir("replay");
  ASSERT_EQ(run("gen-edges --out data --base 2 --size 32 --snrs 1,2", dir).code, 0);
  const fs::path sample = dir / "data" / "train" / "s000000_in.pgm";
  std::ifstream first(sample, std::ios::binary);
  const std::string before((std::istreambuf_iterator<char>(first)), {});
  fs::copy_file(dir / "data" / "run-config.json", dir / "cfg.json");
  fs::remove_all(dir / "data");
  const Outcome r = run("replay cfg.json", dir);
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream second(sample, std::ios::binary);
  const std::string after((std::istreambuf_iterator<char>(second)), {});
  EXPECT_EQ(before, after);
}

TEST(Cli, RuntimeErrorsExitOne) {
  const fs::path dir = fresh_dir("runtime");
  const Outcome create = run("train --data missing --out m.nel --width 2 --epochs 1", dir);
  EXPECT_EQ(create.code, 1);
  EXPECT_NE(create.out.find("error:"), std::string::npos);
}

TEST(Cli, DetectRejectsIndivisibleImage) {
  const fs::path dir = fresh_dir("detect");
  {
    std::ofstream pgm(dir / "odd.pgm", std::ios::binary);
    pgm << "P5\n63 64\n255\n" << std::string(63 * 64, '\x40');
  }
  ASSERT_EQ(run("gen-edges --out data --base 2 --size 32 --snrs 2", dir).code, 0);
  ASSERT_EQ(run("train --data data --out m.nel --width 2 --epochs 1 --crop 0", dir).code, 0);
  const Outcome r = run("detect --ckpt m.nel --in odd.pgm --out o.pgm", dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("divisible by 8"), std::string::npos) << r.out;
  EXPECT_EQ(run("canny --in odd.pgm --out c.pgm", dir).code, 0);
  EXPECT_TRUE(fs::exists(dir / "c.pgm"));
}
