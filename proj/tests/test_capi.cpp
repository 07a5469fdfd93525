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

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "cmclab/cmclab.h"

namespace {

struct ModelGuard {
  cmclab_model* p = nullptr;
  ~ModelGuard() { cmclab_model_free(p); }
};

struct LeafGuard {
  cmclab_leaf* p = nullptr;
  ~LeafGuard() { cmclab_leaf_free(p); }
};

void collect(const char* line, void* user) { static_cast<std::vector<std::string>*>(user)->emplace_back(line); }

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(cmclab_version()) > 0);
  CHECK(std::string(cmclab_status_name(CMCLAB_OK)) == "ok");
  CHECK(std::string(cmclab_status_name(CMCLAB_ERR_DOMAIN)) != std::string(cmclab_status_name(CMCLAB_ERR_MODEL)));
  CHECK(cmclab_set_log_level("quiet") == CMCLAB_OK);
  CHECK(cmclab_set_log_level(nullptr) == CMCLAB_ERR_NULL);
  CHECK(cmclab_configure_threads() >= 1);
}

TEST_CASE("models") {
  ModelGuard s;
  REQUIRE(cmclab_model_schwarzschild(1.0, &s.p) == CMCLAB_OK);
  double m = 0.0;
  CHECK(cmclab_model_mass(s.p, &m) == CMCLAB_OK);
  CHECK(m == 1.0);
  const double x[3] = {10, 0, 0};
  double g[9];
  REQUIRE(cmclab_model_metric(s.p, x, g) == CMCLAB_OK);
  CHECK(std::abs(g[0] - 1.21550625) < 1e-14);
  CHECK(g[1] == 0.0);
  CHECK(g[4] == g[0]);

  const double inside[3] = {0.1, 0, 0};
  CHECK(cmclab_model_metric(s.p, inside, g) == CMCLAB_ERR_DOMAIN);
  CHECK(std::strlen(cmclab_last_error()) > 0);

  ModelGuard bad;
  CHECK(cmclab_model_schwarzschild(-1.0, &bad.p) != CMCLAB_OK);
  CHECK(bad.p == nullptr);
  CHECK(cmclab_model_perturbed(1.0, 0.5, 0.1, "square", &bad.p) != CMCLAB_OK);
  CHECK(cmclab_model_schwarzschild(1.0, nullptr) == CMCLAB_ERR_NULL);
  CHECK(cmclab_model_mass(nullptr, &m) == CMCLAB_ERR_NULL);

  ModelGuard t, i, e;
  const double a[3] = {5, 0, 0};
  REQUIRE(cmclab_model_translated(s.p, a, &t.p) == CMCLAB_OK);
  const double y[3] = {15, 0, 0};
  double gt[9];
  REQUIRE(cmclab_model_metric(t.p, y, gt) == CMCLAB_OK);
  CHECK(gt[0] == g[0]);
  ModelGuard p;
  REQUIRE(cmclab_model_perturbed(1.0, 0.5, 0.1, "odd", &p.p) == CMCLAB_OK);
  CHECK(cmclab_model_interpolated(p.p, 0.5, &i.p) == CMCLAB_OK);
  CHECK(cmclab_model_interpolated(p.p, 2.0, &e.p) != CMCLAB_OK);
  CHECK(cmclab_model_euclidean(&e.p) == CMCLAB_OK);
  cmclab_model_free(nullptr);
}

TEST_CASE("leaves") {
  ModelGuard s;
  REQUIRE(cmclab_model_schwarzschild(1.0, &s.p) == CMCLAB_OK);
  LeafGuard leaf;
  REQUIRE(cmclab_solve_leaf(s.p, 10.0, 16, &leaf.p) == CMCLAB_OK);
  double sigma = 0, radius = 0, residual = 1;
  int iterations = -1;
  REQUIRE(cmclab_leaf_info(leaf.p, &sigma, &radius, &residual, &iterations) == CMCLAB_OK);
  CHECK(sigma == 10.0);
  // area radius phi^2 r of the coordinate sphere r
  const double r = 10.320569288478936;
  CHECK(std::abs(radius - r * std::pow(1.0 + 0.5 / r, 2)) < 1e-10);
  CHECK(residual <= 1e-10);
  CHECK(iterations >= 0);
  double c[3];
  REQUIRE(cmclab_leaf_center(leaf.p, c) == CMCLAB_OK);
  CHECK(std::hypot(c[0], c[1], c[2]) < 1e-10);

  int count = 0;
  CHECK(cmclab_leaf_eigenvalues(leaf.p, nullptr, 0, &count) == CMCLAB_OK);
  CHECK(count == 3);
  double vals[2];
  CHECK(cmclab_leaf_eigenvalues(leaf.p, vals, 2, &count) == CMCLAB_OK);
  CHECK(count == 3);
  CHECK(vals[0] > 0.0);

  char* json = nullptr;
  REQUIRE(cmclab_leaf_surface_json(leaf.p, &json) == CMCLAB_OK);
  CHECK(std::string(json).find("center") != std::string::npos);
  cmclab_string_free(json);

  LeafGuard none;
  CHECK(cmclab_solve_leaf(s.p, 2.0, 16, &none.p) != CMCLAB_OK);
  CHECK(none.p == nullptr);
  CHECK(cmclab_solve_leaf(nullptr, 10.0, 16, &none.p) == CMCLAB_ERR_NULL);
  CHECK(cmclab_leaf_center(nullptr, c) == CMCLAB_ERR_NULL);
}

TEST_CASE("centers") {
  ModelGuard s, t;
  REQUIRE(cmclab_model_schwarzschild(1.0, &s.p) == CMCLAB_OK);
  double z[3];
  REQUIRE(cmclab_adm_center(s.p, 64.0, 16, z) == CMCLAB_OK);
  CHECK(std::hypot(z[0], z[1], z[2]) < 1e-12);
  REQUIRE(cmclab_artificial_flow(s.p, 16.0, 4, 12, z) == CMCLAB_OK);
  CHECK(std::hypot(z[0], z[1], z[2]) < 1e-14);
  CHECK(cmclab_adm_center(s.p, 1.0, 16, z) == CMCLAB_ERR_DOMAIN);
}

TEST_CASE("config check and run") {
  const char* ok[] = {"command=foliate", "sigma=[8]", "bandlimit=12"};
  char* normalized = nullptr;
  REQUIRE(cmclab_check_config(nullptr, ok, 3, &normalized) == CMCLAB_OK);
  CHECK(std::string(normalized).find("\"foliate\"") != std::string::npos);
  cmclab_string_free(normalized);

  const char* bad[] = {"command=foliate", "model.masss=2"};
  CHECK(cmclab_check_config(nullptr, bad, 2, &normalized) == CMCLAB_ERR_CONFIG);
  CHECK(std::string(cmclab_last_error()).find("model.mass") != std::string::npos);
  CHECK(cmclab_check_config("/nonexistent/cmclab.yaml", ok, 3, &normalized) != CMCLAB_OK);

  const auto dir = std::filesystem::temp_directory_path() / "cmclab_test_capi";
  std::filesystem::create_directories(dir);
  const std::string out = "out=" + (dir / "run").string();
  const char* run[] = {"command=foliate", "sigma=[8, 16]", "bandlimit=12", "log_level=quiet", out.c_str()};
  std::vector<std::string> lines;
  int code = -1;
  REQUIRE(cmclab_run(nullptr, run, 5, collect, &lines, &code) == CMCLAB_OK);
  CHECK(code == 0);
  CHECK(lines.size() >= 2);
  CHECK(std::filesystem::exists(dir / "run.json"));
  CHECK(std::filesystem::exists(dir / "run.csv"));
  CHECK(std::filesystem::exists(dir / "run.manifest.json"));

  code = -1;
  CHECK(cmclab_run(nullptr, bad, 2, nullptr, nullptr, &code) == CMCLAB_ERR_CONFIG);
  CHECK(code == 2);
  std::filesystem::remove_all(dir);
}
