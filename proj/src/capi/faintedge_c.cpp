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

#include "faintedge.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "faintedge/commands.hpp"
#include "faintedge/filters.hpp"
#include "faintedge/metrics.hpp"
#include "faintedge/unet.hpp"

struct fe_image {
  faintedge::GrayImage image;
};

struct fe_model {
  std::unique_ptr<faintedge::Model> model;
};

namespace {

thread_local std::string last_error;

fe_status fail(fe_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class Fn>
fe_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return FE_OK;
  } catch (const faintedge::Error& e) {
    return fail(static_cast<fe_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(FE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(FE_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(FE_ERR_INTERNAL, "unknown failure");
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw faintedge::ContractError(std::string(what) + " must not be NULL");
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* fe_last_error(void) { return last_error.c_str(); }

const char* fe_status_name(fe_status status) {
  switch (status) {
    case FE_OK: return "ok";
    case FE_ERR_INTERNAL: return "internal";
    default:
      if (status >= FE_ERR_DIMENSION && status <= FE_ERR_NUMERIC)
        return faintedge::to_string(static_cast<faintedge::ErrorCode>(status));
      return "unknown";
  }
}

const char* fe_version(void) { return "1.0.0"; }

fe_status fe_image_create(int height, int width, const double* pixels, fe_image** out) {
  return guarded([&] {
    require(out, "out");
    if (height <= 0 || width <= 0) throw faintedge::GeometryError("image extents must be positive");
    auto img = std::make_unique<fe_image>();
    img->image = faintedge::GrayImage(height, width);
    if (pixels) std::copy(pixels, pixels + img->image.size(), img->image.pixels.begin());
    *out = img.release();
  });
}

fe_status fe_image_read_pgm(const char* path, fe_image** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto img = std::make_unique<fe_image>();
    img->image = faintedge::read_pgm(path);
    *out = img.release();
  });
}

fe_status fe_image_write_pgm(const fe_image* image, const char* path) {
  return guarded([&] {
    require(image, "image");
    require(path, "path");
    faintedge::write_pgm(path, image->image);
  });
}

int fe_image_height(const fe_image* image) { return image ? image->image.height : 0; }
int fe_image_width(const fe_image* image) { return image ? image->image.width : 0; }
const double* fe_image_data(const fe_image* image) { return image ? image->image.pixels.data() : nullptr; }
void fe_image_free(fe_image* image) { delete image; }

fe_status fe_model_create(int in_channels, int base_width, uint64_t seed, fe_model** out) {
  return guarded([&] {
    require(out, "out");
    if (in_channels < 1 || base_width < 1) throw faintedge::ContractError("channels and width must be >= 1");
    auto m = std::make_unique<fe_model>();
    m->model = std::make_unique<faintedge::Model>(
        faintedge::Model::build(faintedge::UNetSpec::make(in_channels, base_width), seed));
    *out = m.release();
  });
}

fe_status fe_model_load(const char* path, fe_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto m = std::make_unique<fe_model>();
    m->model = std::make_unique<faintedge::Model>(faintedge::load_checkpoint(path));
    *out = m.release();
  });
}

fe_status fe_model_save(const fe_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    faintedge::save_checkpoint(*model->model, path);
  });
}

fe_status fe_model_parameter_count(const fe_model* model, size_t* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = model->model->parameter_count();
  });
}

fe_status fe_model_predict(const fe_model* model, const fe_image* input, fe_image** out) {
  return guarded([&] {
    require(model, "model");
    require(input, "input");
    require(out, "out");
    auto img = std::make_unique<fe_image>();
    img->image = model->model->predict(input->image);
    *out = img.release();
  });
}

void fe_model_free(fe_model* model) { delete model; }

fe_status fe_canny(const fe_image* image, double low, double high, double sigma, fe_image** out) {
  return guarded([&] {
    require(image, "image");
    require(out, "out");
    auto img = std::make_unique<fe_image>();
    img->image = faintedge::to_gray(faintedge::canny(image->image, {low, high, sigma}));
    *out = img.release();
  });
}

fe_status fe_strict_f(const fe_image* pred, const fe_image* labels, double threshold, fe_edge_score* out) {
  return guarded([&] {
    require(pred, "pred");
    require(labels, "labels");
    require(out, "out");
    const auto s = faintedge::strict_f_measure(pred->image, faintedge::threshold(labels->image, 0.5), threshold);
    *out = {s.precision, s.recall, s.f, s.tp, s.fp, s.fn};
  });
}

fe_status fe_psnr(const fe_image* a, const fe_image* b, double* out_db) {
  return guarded([&] {
    require(a, "a");
    require(b, "b");
    require(out_db, "out_db");
    *out_db = faintedge::psnr(a->image, b->image).db;
  });
}

fe_status fe_ssim(const fe_image* a, const fe_image* b, double* out) {
  return guarded([&] {
    require(a, "a");
    require(b, "b");
    require(out, "out");
    *out = faintedge::ssim(a->image, b->image);
  });
}

fe_status fe_run(const char* command, const char* options_json, char** result_json) {
  return guarded([&] {
    require(command, "command");
    require(result_json, "result_json");
    nlohmann::json options = nlohmann::json::object();
    if (options_json && *options_json) {
      try {
        options = nlohmann::json::parse(options_json);
      } catch (const nlohmann::json::exception& e) {
        throw faintedge::ContractError(std::string("options are not valid JSON: ") + e.what());
      }
    }
    const auto outcome = faintedge::run_command(command, options);
    const nlohmann::json doc = {{"command", command}, {"config", outcome.config}, {"result", outcome.result}};
    *result_json = duplicate(doc.dump(2));
  });
}

char* fe_command_list(void) {
  std::string s;
  for (const auto& n : faintedge::command_names()) s += n + "\n";
  try {
    return duplicate(s);
  } catch (...) {
    return nullptr;
  }
}

void fe_string_free(char* s) { std::free(s); }

}  // extern "C"
