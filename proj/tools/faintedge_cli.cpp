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

// Command-line front end. Every subcommand turns its flags into a JSON
// options object and hands it to fe_run; the effective options come back and
// are saved next to the outputs so the run can be replayed.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "faintedge.h"

namespace {

using nlohmann::json;

enum class Kind { integer, unsigned_integer, number, text, flag, boolean, numbers, integers };

struct Flag {
  const char* name;  // long flag without dashes; the option key swaps '-' for '_'
  Kind kind;
  const char* help;
};

struct Command {
  const char* name;
  const char* help;
  std::vector<Flag> flags;
  std::vector<const char*> required;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> table = {
      {"gen-edges",
       "Generate the noisy binary-pattern dataset for edge detection",
       {{"out", Kind::text, "output directory"},
        {"base", Kind::integer, "number of base binary images (default 10)"},
        {"size", Kind::integer, "square image size (default 256)"},
        {"height", Kind::integer, "image height (overrides --size)"},
        {"width", Kind::integer, "image width (overrides --size)"},
        {"snrs", Kind::numbers, "comma-separated SNR levels (default 1,1.2,...,2)"},
        {"hflip", Kind::boolean, "store horizontally flipped copies (default true)"},
        {"vflip-online", Kind::boolean, "record online vertical flips for training (default true)"},
        {"pure-noise-fraction", Kind::number, "extra pure-noise samples, fraction of core (default 0.02)"},
        {"train-fraction", Kind::number, "share of base images used for training (default 0.9)"},
        {"seed", Kind::unsigned_integer, "random seed (default 0)"}},
       {"out"}},
      {"gen-denoise",
       "Generate noisy/clean pairs for denoising",
       {{"out", Kind::text, "output directory"},
        {"images", Kind::text, "directory of .pgm/.ppm images to tile (default: procedural images)"},
        {"count", Kind::integer, "procedural image count (default 16)"},
        {"patch", Kind::integer, "patch size, multiple of 8 (default 128)"},
        {"max-patches", Kind::integer, "cap on tiles taken from --images (0 = all)"},
        {"sigmas", Kind::numbers, "noise sigmas on the 0-255 scale (default 25)"},
        {"train-fraction", Kind::number, "share of images used for training (default 0.9)"},
        {"seed", Kind::unsigned_integer, "random seed (default 0)"}},
       {"out"}},
      {"train",
       "Train a U-Net on a generated dataset",
       {{"data", Kind::text, "dataset directory"},
        {"out", Kind::text, "checkpoint path (.nel)"},
        {"width", Kind::integer, "base channel width (default 64)"},
        {"init", Kind::text, "start from this checkpoint"},
        {"dtype", Kind::text, "f32 or f64 (default f32)"},
        {"epochs", Kind::integer, "epochs (default 100 edges, 200 denoise)"},
        {"batch", Kind::integer, "batch size (default 4)"},
        {"optimizer", Kind::text, "adam or sgd_momentum (default adam)"},
        {"lr", Kind::number, "learning rate (default 1e-3)"},
        {"beta1", Kind::number, "Adam beta1"},
        {"beta2", Kind::number, "Adam beta2"},
        {"epsilon", Kind::number, "Adam epsilon"},
        {"momentum", Kind::number, "SGD momentum"},
        {"lambda-edge", Kind::number, "edge-preservation weight for denoising (default 1)"},
        {"seed", Kind::unsigned_integer, "random seed (default 0)"},
        {"eval-every", Kind::integer, "epochs between evaluations (default 1)"},
        {"crop", Kind::integer, "random crop size, multiple of 8; 0 = full images (default 128)"},
        {"grad-clip", Kind::number, "global gradient-norm clip, 0 disables (default 10)"},
        {"resample-noise", Kind::boolean, "draw fresh noise every epoch (default true)"},
        {"hflip", Kind::boolean, "online horizontal flips"},
        {"vflip", Kind::boolean, "online vertical flips"},
        {"max-steps", Kind::integer, "stop after this many optimizer steps (0 = no cap)"},
        {"threshold", Kind::number, "threshold for the per-epoch F (default 0.5)"},
        {"standardize-input", Kind::boolean, "fit the input mean/std on the train split (default true)"},
        {"resume", Kind::flag, "continue from --out and its .state file"},
        {"log", Kind::text, "training log CSV (default <out>.log.csv)"}},
       {"data", "out"}},
      {"eval",
       "Score a model on a dataset split, or a prediction image against a reference",
       {{"ckpt", Kind::text, "checkpoint (dataset mode)"},
        {"data", Kind::text, "dataset directory (dataset mode)"},
        {"split", Kind::text, "train or test (default test)"},
        {"pred", Kind::text, "prediction image (image mode)"},
        {"ref", Kind::text, "reference image: label mask or clean image (image mode)"},
        {"task", Kind::text, "edges or denoise (image mode, default denoise)"},
        {"threshold", Kind::number, "detection threshold (default 0.5)"},
        {"redraws", Kind::integer, "fresh noise draws per edge image (default 0 = stored noise)"},
        {"seed", Kind::unsigned_integer, "seed for noise redraws"},
        {"out", Kind::text, "metrics CSV path (default stdout)"}},
       {}},
      {"detect",
       "Run edge detection on one image",
       {{"ckpt", Kind::text, "checkpoint"},
        {"in", Kind::text, "input PGM"},
        {"out", Kind::text, "output PGM"},
        {"threshold", Kind::number, "write a binary mask at this threshold (default: raw map)"}},
       {"ckpt", "in", "out"}},
      {"denoise",
       "Denoise one image",
       {{"ckpt", Kind::text, "checkpoint"},
        {"in", Kind::text, "noisy PGM"},
        {"out", Kind::text, "output PGM"},
        {"clean", Kind::text, "clean reference for a PSNR report"}},
       {"ckpt", "in", "out"}},
      {"canny",
       "Classical Canny baseline on one image",
       {{"in", Kind::text, "input PGM"},
        {"out", Kind::text, "output mask PGM"},
        {"low", Kind::number, "low hysteresis threshold (default 0.1)"},
        {"high", Kind::number, "high hysteresis threshold (default 0.2)"},
        {"sigma", Kind::number, "Gaussian sigma (default 1)"}},
       {"in", "out"}},
      {"bench",
       "Median batch-1 forward time per image size (warm-up discarded, no I/O timed)",
       {{"ckpt", Kind::text, "checkpoint (default: fresh model of --width)"},
        {"width", Kind::integer, "base width for a fresh model (default 64)"},
        {"sizes", Kind::integers, "comma-separated square sizes (default 128,256)"},
        {"repeat", Kind::integer, "timed repeats per size (default 5)"},
        {"seed", Kind::unsigned_integer, "seed for weights and inputs"},
        {"out", Kind::text, "CSV path (default stdout)"}},
       {}},
      {"gradcheck",
       "Finite-difference check of all ops, losses and a reduced U-Net",
       {{"seeds", Kind::integer, "number of seeds (default 10)"},
        {"seed", Kind::unsigned_integer, "first seed (default 0)"},
        {"unet", Kind::boolean, "include the U-Net check (default true)"},
        {"unet-width", Kind::integer, "U-Net width (default 4)"},
        {"unet-size", Kind::integer, "U-Net input size (default 16)"},
        {"tolerance", Kind::number, "relative tolerance for ops (default 1e-5)"},
        {"unet-tolerance", Kind::number, "relative tolerance for the U-Net (default 1e-4)"},
        {"out", Kind::text, "CSV path (default stdout)"}},
       {}},
      {"snr-sweep",
       "Strict F of model and Canny over SNR levels on the evaluation pattern",
       {{"ckpt", Kind::text, "checkpoint"},
        {"pattern", Kind::text, "pattern PGM (default: built-in pattern)"},
        {"size", Kind::integer, "built-in pattern size (default 128)"},
        {"snrs", Kind::numbers, "SNR levels (default 1,1.2,...,2)"},
        {"iterations", Kind::integer, "noise draws per level (default 100)"},
        {"seed", Kind::unsigned_integer, "seed (default 0)"},
        {"threshold", Kind::number, "model threshold (default 0.5)"},
        {"canny-low", Kind::number, "Canny low threshold"},
        {"canny-high", Kind::number, "Canny high threshold"},
        {"canny-sigma", Kind::number, "Canny sigma"},
        {"out", Kind::text, "CSV path (default stdout)"},
        {"svg", Kind::text, "SVG chart path"}},
       {"ckpt"}},
  };
  return table;
}

std::string key_of(const char* flag) {
  std::string k = flag;
  for (char& c : k)
    if (c == '-') c = '_';
  return k;
}

template <class T>
std::vector<T> split_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    is.imbue(std::locale::classic());
    T v;
    if (!(is >> v) || !is.eof()) throw CLI::ValidationError("list", "bad list element '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError("list", "empty list");
  return out;
}

json convert(Kind kind, const std::string& text) {
  switch (kind) {
    case Kind::integer: return std::stoll(text);
    case Kind::unsigned_integer: return std::stoull(text);
    case Kind::number: return std::stod(text);
    case Kind::text: return text;
    case Kind::flag: return true;
    case Kind::boolean:
      if (text == "true" || text == "1" || text == "yes") return true;
      if (text == "false" || text == "0" || text == "no") return false;
      throw CLI::ValidationError("boolean", "expected true or false, got '" + text + "'");
    case Kind::numbers: return split_list<double>(text);
    case Kind::integers: return split_list<long long>(text);
  }
  return nullptr;
}

std::string sidecar_path(const std::string& command, const json& config) {
  if (config.contains("out") && config["out"].is_string()) {
    const std::string out = config["out"];
    if (command == "gen-edges" || command == "gen-denoise") return out + "/run-config.json";
    return out + ".run-config.json";
  }
  return "run-config.json";
}

// Runs through the C API; prints the result and returns the exit code.
int execute(const std::string& command, const json& options, const std::string& sidecar_override,
            bool write_sidecar) {
  char* raw = nullptr;
  const fe_status st = fe_run(command.c_str(), options.dump().c_str(), &raw);
  if (st != FE_OK) {
    std::cerr << "error: " << fe_last_error() << "\n";
    return 1;
  }
  json doc = json::parse(raw);
  fe_string_free(raw);
  if (write_sidecar) {
    const std::string path = sidecar_override.empty() ? sidecar_path(command, doc["config"]) : sidecar_override;
    std::ofstream f(path);
    if (!f) {
      std::cerr << "error: cannot write " << path << "\n";
      return 1;
    }
    f << json{{"command", command}, {"config", doc["config"]}}.dump(2) << "\n";
  }
  json& result = doc["result"];
  const bool has_out = doc["config"].contains("out") && doc["config"]["out"].is_string();
  if (result.contains("csv")) {
    if (!has_out) std::cout << result["csv"].get<std::string>();
    result.erase("csv");
  }
  if (has_out || !result.empty()) std::cerr << result.dump() << "\n";
  if (command == "gradcheck" && !result.value("passed", true)) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Faint-edge detection and edge-preserving denoising with a from-scratch U-Net"};
  app.require_subcommand(1);
  std::string sidecar;
  app.add_option("--config-out", sidecar, "where to write the resolved run config");

  struct Bound {
    const Command* command;
    CLI::App* sub;
    std::vector<std::pair<const Flag*, CLI::Option*>> options;
    std::vector<std::string> values;
  };
  std::vector<Bound> bound;
  bound.reserve(commands().size());
  for (const auto& c : commands()) {
    Bound b{&c, app.add_subcommand(c.name, c.help), {}, {}};
    b.values.resize(c.flags.size());
    bound.push_back(std::move(b));
  }
  for (auto& b : bound) {
    for (std::size_t i = 0; i < b.command->flags.size(); ++i) {
      const Flag& f = b.command->flags[i];
      const std::string name = std::string("--") + f.name;
      CLI::Option* opt = f.kind == Kind::flag ? b.sub->add_flag(name, f.help)
                                              : b.sub->add_option(name, b.values[i], f.help);
      for (const char* r : b.command->required)
        if (std::string(r) == f.name) opt->required();
      b.options.emplace_back(&f, opt);
    }
  }
  std::string replay_file;
  CLI::App* replay = app.add_subcommand("replay", "Re-run a command from its run-config.json");
  replay->add_option("config", replay_file, "run-config.json")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (replay->parsed()) {
    json doc;
    try {
      std::ifstream f(replay_file);
      doc = json::parse(f);
      return execute(doc.at("command").get<std::string>(), doc.at("config"), "", false);
    } catch (const json::exception& e) {
      std::cerr << "error: " << replay_file << " is not a run config: " << e.what() << "\n";
      return 1;
    }
  }
  for (auto& b : bound) {
    if (!b.sub->parsed()) continue;
    json options = json::object();
    try {
      for (std::size_t i = 0; i < b.options.size(); ++i) {
        const auto& [flag, opt] = b.options[i];
        if (opt->count() == 0) continue;
        options[key_of(flag->name)] = convert(flag->kind, b.values[i]);
      }
    } catch (const std::exception& e) {
      std::cerr << "usage error: " << e.what() << "\n" << b.sub->help();
      return 2;
    }
    return execute(b.command->name, options, sidecar, true);
  }
  return 2;
}
