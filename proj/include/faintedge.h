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

#ifndef FAINTEDGE_H
#define FAINTEDGE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FE_API __declspec(dllimport)
#elif defined(__GNUC__)
#define FE_API __attribute__((visibility("default")))
#else
#define FE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fe_status {
  FE_OK = 0,
  FE_ERR_DIMENSION = 1,
  FE_ERR_GEOMETRY = 2,
  FE_ERR_CONTRACT = 3,
  FE_ERR_STATE = 4,
  FE_ERR_FORMAT = 5,
  FE_ERR_COMPATIBILITY = 6,
  FE_ERR_IO = 7,
  FE_ERR_NUMERIC = 8,
  FE_ERR_INTERNAL = 100
} fe_status;

/* Message of the last failing call on this thread ("" after success). */
FE_API const char* fe_last_error(void);
FE_API const char* fe_status_name(fe_status status);
FE_API const char* fe_version(void);

/* ---- images: single channel, row-major, values in [0, 1] ---- */

typedef struct fe_image fe_image;

/* `pixels` may be NULL for a zero image. */
FE_API fe_status fe_image_create(int height, int width, const double* pixels, fe_image** out);
FE_API fe_status fe_image_read_pgm(const char* path, fe_image** out);
FE_API fe_status fe_image_write_pgm(const fe_image* image, const char* path);
FE_API int fe_image_height(const fe_image* image);
FE_API int fe_image_width(const fe_image* image);
/* Borrowed pointer, valid until the image is freed. */
FE_API const double* fe_image_data(const fe_image* image);
FE_API void fe_image_free(fe_image* image);

/* ---- models ---- */

typedef struct fe_model fe_model;

FE_API fe_status fe_model_create(int in_channels, int base_width, uint64_t seed, fe_model** out);
FE_API fe_status fe_model_load(const char* path, fe_model** out);
FE_API fe_status fe_model_save(const fe_model* model, const char* path);
FE_API fe_status fe_model_parameter_count(const fe_model* model, size_t* out);
/* Sigmoid map of the same size as the input; height and width must be
   multiples of 8. Safe to call concurrently on one model. */
FE_API fe_status fe_model_predict(const fe_model* model, const fe_image* input, fe_image** out);
FE_API void fe_model_free(fe_model* model);

/* ---- classical baselines and metrics ---- */

/* Writes a 0/1 image. */
FE_API fe_status fe_canny(const fe_image* image, double low, double high, double sigma, fe_image** out);

typedef struct fe_edge_score {
  double precision;
  double recall;
  double f;
  uint64_t tp;
  uint64_t fp;
  uint64_t fn;
} fe_edge_score;

/* `labels` pixels >= 0.5 count as edges; `pred` pixels >= threshold as detections. */
FE_API fe_status fe_strict_f(const fe_image* pred, const fe_image* labels, double threshold, fe_edge_score* out);
/* +inf for identical images. */
FE_API fe_status fe_psnr(const fe_image* a, const fe_image* b, double* out_db);
FE_API fe_status fe_ssim(const fe_image* a, const fe_image* b, double* out);

/* ---- tool commands ----
   Runs a command ("gen-edges", "train", "eval", ...) from a JSON object of
   options. On success *result_json receives
   {"command": ..., "config": <resolved options>, "result": {...}},
   to be released with fe_string_free. */
FE_API fe_status fe_run(const char* command, const char* options_json, char** result_json);
/* Newline-separated command names; release with fe_string_free. */
FE_API char* fe_command_list(void);
FE_API void fe_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
