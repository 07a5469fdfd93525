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

#include "cmclab/cmclab.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "cmclab/acceptance.hpp"
#include "cmclab/config.hpp"
#include "cmclab/errors.hpp"
#include "cmclab/runner.hpp"

struct cmclab_model {
  cmclab::MetricPtr ptr;
};

struct cmclab_leaf {
  cmclab::Leaf leaf;
};

namespace {

thread_local std::string g_last_error;

cmclab_status status_of(cmclab::ErrorKind k) {
  using cmclab::ErrorKind;
  switch (k) {
    case ErrorKind::configuration: return CMCLAB_ERR_CONFIG;
    case ErrorKind::model: return CMCLAB_ERR_MODEL;
    case ErrorKind::domain:
    case ErrorKind::grid_mismatch: return CMCLAB_ERR_DOMAIN;
    case ErrorKind::solver:
    case ErrorKind::divergence:
    case ErrorKind::solvability: return CMCLAB_ERR_SOLVER;
    case ErrorKind::io: return CMCLAB_ERR_IO;
  }
  return CMCLAB_ERR_INTERNAL;
}

template <class F>
cmclab_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return CMCLAB_OK;
  } catch (const cmclab::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CMCLAB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CMCLAB_ERR_INTERNAL;
  }
}

cmclab_status null_arg(const char* name) {
  g_last_error = std::string("null argument: ") + name;
  return CMCLAB_ERR_NULL;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<std::string> collect(const char* const* items, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i)
    if (items && items[i]) out.emplace_back(items[i]);
  return out;
}

cmclab_status wrap_model(cmclab::MetricPtr p, cmclab_model** out) {
  *out = new cmclab_model{std::move(p)};
  return CMCLAB_OK;
}

cmclab::ExperimentConfig load(const char* path, const char* const* overrides, int n) {
  if (!path || !*path) return cmclab::parse_config_text("", collect(overrides, n), "<flags>");
  return cmclab::parse_config(path, collect(overrides, n));
}

cmclab::Vec3 vec(const double a[3]) { return {a[0], a[1], a[2]}; }

}  // namespace

extern "C" {

const char* cmclab_version(void) { return CMCLAB_VERSION; }

const char* cmclab_last_error(void) { return g_last_error.c_str(); }

const char* cmclab_status_name(cmclab_status s) {
  switch (s) {
    case CMCLAB_OK: return "ok";
    case CMCLAB_ERR_CONFIG: return "configuration error";
    case CMCLAB_ERR_MODEL: return "model error";
    case CMCLAB_ERR_DOMAIN: return "domain error";
    case CMCLAB_ERR_SOLVER: return "solver error";
    case CMCLAB_ERR_NULL: return "null argument";
    case CMCLAB_ERR_IO: return "i/o error";
    case CMCLAB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void cmclab_string_free(char* s) { std::free(s); }

cmclab_status cmclab_set_log_level(const char* level) {
  if (!level) return null_arg("level");
  return guarded([&] {
    const std::string l(level);
    if (l != "quiet" && l != "normal" && l != "debug")
      cmclab::fail(cmclab::ErrorKind::configuration, "log level must be quiet, normal or debug");
    cmclab::set_log_level(l);
  });
}

int cmclab_configure_threads(void) {
  int n = -1;
  if (guarded([&] { n = cmclab::configure_threads(); }) != CMCLAB_OK) return -1;
  return n;
}

cmclab_status cmclab_model_euclidean(cmclab_model** out) {
  if (!out) return null_arg("out");
  return guarded([&] { wrap_model(cmclab::euclidean(), out); });
}

cmclab_status cmclab_model_schwarzschild(double m, cmclab_model** out) {
  if (!out) return null_arg("out");
  return guarded([&] { wrap_model(cmclab::schwarzschild(m), out); });
}

cmclab_status cmclab_model_perturbed(double m, double epsilon, double amplitude, const char* shape,
                                     cmclab_model** out) {
  if (!out) return null_arg("out");
  if (!shape) return null_arg("shape");
  return guarded([&] { wrap_model(cmclab::perturbed_schwarzschild(m, epsilon, amplitude, shape), out); });
}

cmclab_status cmclab_model_translated(const cmclab_model* base, const double a[3], cmclab_model** out) {
  if (!base) return null_arg("base");
  if (!a) return null_arg("a");
  if (!out) return null_arg("out");
  return guarded([&] { wrap_model(cmclab::translated(base->ptr, vec(a)), out); });
}

cmclab_status cmclab_model_interpolated(const cmclab_model* base, double tau, cmclab_model** out) {
  if (!base) return null_arg("base");
  if (!out) return null_arg("out");
  return guarded([&] { wrap_model(cmclab::interpolated(base->ptr, tau), out); });
}

void cmclab_model_free(cmclab_model* model) { delete model; }

cmclab_status cmclab_model_mass(const cmclab_model* model, double* m) {
  if (!model) return null_arg("model");
  if (!m) return null_arg("m");
  *m = model->ptr->mass();
  return CMCLAB_OK;
}

cmclab_status cmclab_model_metric(const cmclab_model* model, const double x[3], double g[9]) {
  if (!model) return null_arg("model");
  if (!x) return null_arg("x");
  if (!g) return null_arg("g");
  return guarded([&] {
    const cmclab::Mat3 m = model->ptr->metric(vec(x));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g[3 * i + j] = m(i, j);
  });
}

cmclab_status cmclab_solve_leaf(const cmclab_model* model, double sigma, int band_limit, cmclab_leaf** out) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guarded([&] {
    cmclab::SolverConfig cfg;
    cfg.band_limit = band_limit;
    *out = new cmclab_leaf{cmclab::solve_cmc(*model->ptr, sigma, cfg)};
  });
}

void cmclab_leaf_free(cmclab_leaf* leaf) { delete leaf; }

cmclab_status cmclab_leaf_center(const cmclab_leaf* leaf, double center[3]) {
  if (!leaf) return null_arg("leaf");
  if (!center) return null_arg("center");
  for (int i = 0; i < 3; ++i) center[i] = leaf->leaf.diag.center[i];
  return CMCLAB_OK;
}

cmclab_status cmclab_leaf_info(const cmclab_leaf* leaf, double* sigma, double* area_radius, double* residual,
                               int* iterations) {
  if (!leaf) return null_arg("leaf");
  if (sigma) *sigma = leaf->leaf.sigma;
  if (area_radius) *area_radius = leaf->leaf.diag.area_radius;
  if (residual) *residual = leaf->leaf.diag.residual;
  if (iterations) *iterations = leaf->leaf.diag.iterations;
  return CMCLAB_OK;
}

cmclab_status cmclab_leaf_eigenvalues(const cmclab_leaf* leaf, double* values, int capacity, int* count) {
  if (!leaf) return null_arg("leaf");
  if (!count) return null_arg("count");
  const auto& ev = leaf->leaf.diag.eigenvalues;
  *count = static_cast<int>(ev.size());
  if (values)
    for (int i = 0; i < capacity && i < *count; ++i) values[i] = ev[i];
  return CMCLAB_OK;
}

cmclab_status cmclab_leaf_surface_json(const cmclab_leaf* leaf, char** json) {
  if (!leaf) return null_arg("leaf");
  if (!json) return null_arg("json");
  return guarded([&] { *json = dup_string(leaf->leaf.surface.to_json()); });
}

cmclab_status cmclab_adm_center(const cmclab_model* model, double radius, int band_limit, double out[3]) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guarded([&] {
    const cmclab::Vec3 v = cmclab::adm_center_integral(*model->ptr, radius, band_limit);
    for (int i = 0; i < 3; ++i) out[i] = v[i];
  });
}

cmclab_status cmclab_artificial_flow(const cmclab_model* model, double sigma, int steps, int band_limit,
                                     double endpoint[3]) {
  if (!model) return null_arg("model");
  if (!endpoint) return null_arg("endpoint");
  return guarded([&] {
    const auto flow = cmclab::artificial_flow_integrate(model->ptr, sigma, steps, band_limit);
    for (int i = 0; i < 3; ++i) endpoint[i] = flow.endpoint[i];
  });
}

cmclab_status cmclab_check_config(const char* path, const char* const* overrides, int n_overrides,
                                  char** normalized) {
  return guarded([&] {
    const auto cfg = load(path, overrides, n_overrides);
    if (normalized) *normalized = dup_string(cfg.to_json().dump(2));
  });
}

cmclab_status cmclab_run(const char* path, const char* const* overrides, int n_overrides, cmclab_line_fn on_line,
                         void* user, int* exit_code) {
  if (!exit_code) return null_arg("exit_code");
  *exit_code = cmclab::exit_internal;
  cmclab::ExperimentConfig cfg;
  const cmclab_status parsed = guarded([&] { cfg = load(path, overrides, n_overrides); });
  if (parsed != CMCLAB_OK) {
    *exit_code = cmclab::exit_config;
    return parsed;
  }
  return guarded([&] {
    cmclab::set_log_level(cfg.log_level);
    cmclab::configure_threads();
    const auto manifest = cmclab::run_experiment(cfg);
    cmclab::write_outputs(manifest);
    if (on_line) {
      for (const auto& s : manifest.stages) {
        const std::string line = std::string(s.ok ? "[ok]   " : "[FAIL] ") + s.name + (s.ok ? "" : ": " + s.error);
        on_line(line.c_str(), user);
      }
      for (const auto& g : manifest.gates) {
        const std::string line = std::string(g.pass ? "[PASS] " : "[FAIL] ") + g.name + ": " + g.detail;
        on_line(line.c_str(), user);
      }
    }
    *exit_code = manifest.exit_code();
  });
}

}  // extern "C"
