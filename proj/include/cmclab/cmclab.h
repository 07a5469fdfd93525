/*
 * Copyright (c) 2026 The cmclab Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CMCLAB_CMCLAB_H
#define CMCLAB_CMCLAB_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CMCLAB_API __declspec(dllexport)
#else
#define CMCLAB_API __attribute__((visibility("default")))
#endif

typedef struct cmclab_model cmclab_model;
typedef struct cmclab_leaf cmclab_leaf;

typedef enum cmclab_status {
  CMCLAB_OK = 0,
  CMCLAB_ERR_CONFIG = 1,
  CMCLAB_ERR_MODEL = 2,
  CMCLAB_ERR_DOMAIN = 3,
  CMCLAB_ERR_SOLVER = 4,
  CMCLAB_ERR_NULL = 5,
  CMCLAB_ERR_IO = 6,
  CMCLAB_ERR_INTERNAL = 7
} cmclab_status;

/* Receives one human-readable line (stage summaries, acceptance results). */
typedef void (*cmclab_line_fn)(const char* line, void* user);

CMCLAB_API const char* cmclab_version(void);
/* Message of the last failed call on this thread; never NULL. */
CMCLAB_API const char* cmclab_last_error(void);
CMCLAB_API const char* cmclab_status_name(cmclab_status status);
CMCLAB_API void cmclab_string_free(char* s);

/* "quiet", "normal" or "debug". */
CMCLAB_API cmclab_status cmclab_set_log_level(const char* level);
/* Applies CMCLAB_THREADS; returns the thread count, or -1 on a bad value. */
CMCLAB_API int cmclab_configure_threads(void);

CMCLAB_API cmclab_status cmclab_model_euclidean(cmclab_model** out);
CMCLAB_API cmclab_status cmclab_model_schwarzschild(double m, cmclab_model** out);
/* shape is "even" or "odd" */
CMCLAB_API cmclab_status cmclab_model_perturbed(double m, double epsilon, double amplitude, const char* shape,
                                                cmclab_model** out);
CMCLAB_API cmclab_status cmclab_model_translated(const cmclab_model* base, const double a[3], cmclab_model** out);
CMCLAB_API cmclab_status cmclab_model_interpolated(const cmclab_model* base, double tau, cmclab_model** out);
CMCLAB_API void cmclab_model_free(cmclab_model* model);
CMCLAB_API cmclab_status cmclab_model_mass(const cmclab_model* model, double* m);
/* Row-major 3x3 metric at x. */
CMCLAB_API cmclab_status cmclab_model_metric(const cmclab_model* model, const double x[3], double g[9]);

CMCLAB_API cmclab_status cmclab_solve_leaf(const cmclab_model* model, double sigma, int band_limit,
                                           cmclab_leaf** out);
CMCLAB_API void cmclab_leaf_free(cmclab_leaf* leaf);
CMCLAB_API cmclab_status cmclab_leaf_center(const cmclab_leaf* leaf, double center[3]);
CMCLAB_API cmclab_status cmclab_leaf_info(const cmclab_leaf* leaf, double* sigma, double* area_radius,
                                          double* residual, int* iterations);
/* Writes up to capacity eigenvalues of -L; *count receives the number available. */
CMCLAB_API cmclab_status cmclab_leaf_eigenvalues(const cmclab_leaf* leaf, double* values, int capacity, int* count);
/* Surface as JSON {center, bandLimit, rho}; free with cmclab_string_free. */
CMCLAB_API cmclab_status cmclab_leaf_surface_json(const cmclab_leaf* leaf, char** json);

CMCLAB_API cmclab_status cmclab_adm_center(const cmclab_model* model, double radius, int band_limit, double out[3]);
CMCLAB_API cmclab_status cmclab_artificial_flow(const cmclab_model* model, double sigma, int steps, int band_limit,
                                                double endpoint[3]);

/* path may be NULL or empty: the config is then built from the overrides alone. */
/* Validates a config file with key=value overrides; on success *normalized
   holds the effective config as JSON (free with cmclab_string_free). */
CMCLAB_API cmclab_status cmclab_check_config(const char* path, const char* const* overrides, int n_overrides,
                                             char** normalized);
/* Parses, runs and writes <out>.json, <out>.csv, <out>.manifest.json.
   *exit_code follows the CLI contract (0 ok, 1 stage or gate failure,
   2 configuration error, 3 internal error). */
CMCLAB_API cmclab_status cmclab_run(const char* path, const char* const* overrides, int n_overrides,
                                    cmclab_line_fn on_line, void* user, int* exit_code);

#ifdef __cplusplus
}
#endif

#endif
