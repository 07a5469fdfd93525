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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "cmclab/config.hpp"
#include "cmclab/errors.hpp"
#include "cmclab/runner.hpp"

using namespace cmclab;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    parse_config_text(text, overrides, "test.yaml");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::configuration);
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig quick(const std::string& command, const std::string& extra = "") {
  return parse_config_text("command: " + command + "\nbandlimit: 12\nlog_level: quiet\n" + extra);
}

}  // namespace

TEST_CASE("minimal config") {
  const auto c = parse_config_text("command: foliate\nmodel:\n  kind: schwarzschild\n  m: 1\n");
  CHECK(c.schema == kConfigSchemaVersion);
  CHECK(c.model.kind == "schwarzschild");
  CHECK(c.model.m == 1.0);
  CHECK(c.sigmas == std::vector<double>{8, 16, 32});
  CHECK(c.solver.band_limit == 32);
  CHECK(c.convention == MomentumConvention::adm);

  const auto full = parse_config_text(R"(
schema: 1
command: evolve
model: {kind: perturbed, mass: 2, epsilon: 0.7, A: 0.2, shape: even, a: [1, 0, 0]}
data: {kind: synthetic, delta: 0.5, B: 2, b: [0, 0, 1]}
sigma: [16, 32]
bandlimit: 24
center_measure: euclidean
momentum_convention: direct
)");
  CHECK(full.model.m == 2.0);
  CHECK(full.model.shape == "even");
  CHECK(full.model.a.x() == 1.0);
  CHECK(full.data.b.z() == 1.0);
  CHECK(full.center_measure == CenterMeasure::euclidean);
  CHECK(full.convention == MomentumConvention::direct);
  // the normalized echo parses back to the same config
  const auto again = parse_config_text(full.to_json().dump());
  CHECK(again.to_json() == full.to_json());
}

TEST_CASE("validation errors") {
  const auto range = error_of("model:\n  kind: perturbed\n  epsilon: -0.5\n");
  CHECK(contains(range, "model.epsilon"));
  CHECK(contains(range, "test.yaml:3"));

  const auto unknown = error_of("model:\n  masss: 1\n");
  CHECK(contains(unknown, "masss"));
  CHECK(contains(unknown, "model.mass"));

  const auto syntax = error_of("model:\n  kind: [schwarzschild\nsigma: 8\n");
  CHECK(contains(syntax, "test.yaml:"));

  // every problem is listed
  const auto many = error_of("bandlimit: 3\nsigma: [16, 8, 32]\nfoo: 1\n");
  CHECK(contains(many, "bandlimit"));
  CHECK(contains(many, "sigma"));
  CHECK(contains(many, "foo"));

  CHECK(contains(error_of("command: study\nsigma: [16, 32]\n"), "sigma"));
  CHECK(contains(error_of("command: adm-center\nradii: [64]\n"), "radii"));
  CHECK(contains(error_of("command: fly\n"), "command"));
}

TEST_CASE("overrides") {
  const auto c = parse_config_text("model:\n  kind: perturbed\n  A: 0.1\n",
                                   {"model.A=0.3", "sigma=[16, 32]", "model={shape: even}", "command=foliate"});
  CHECK(c.model.A == 0.3);
  CHECK(c.model.kind == "perturbed");
  CHECK(c.model.shape == "even");
  CHECK(c.sigmas == std::vector<double>{16, 32});
  CHECK(c.command == "foliate");
  CHECK(contains(error_of("", {"nokey"}), "nokey"));
  CHECK(contains(error_of("", {"model.masss=2"}), "model.mass"));
}

TEST_CASE("foliate run") {
  const auto m = run_experiment(quick("foliate", "sigma: [8, 16]\n"));
  CHECK(m.all_ok());
  CHECK(m.exit_code() == exit_ok);
  REQUIRE(m.report["leaves"].size() == 2);
  CHECK(m.report["nested"] == true);
  CHECK(m.table.rows.size() == 2);
  CHECK(m.table.header.front() == "sigma");
  const double r8 = m.report["leaves"][0]["area_radius"];
  CHECK(r8 > 8.0);

  // a failing leaf fails its stage and the run
  const auto bad = run_experiment(quick("foliate", "sigma: [4, 16]\n"));
  CHECK_FALSE(bad.all_ok());
  CHECK(bad.exit_code() == exit_failed);
}

TEST_CASE("evolve and artificial runs") {
  const auto ts = run_experiment(quick("evolve", "sigma: [16, 32]\n"));
  REQUIRE(ts.all_ok());
  for (const auto& row : ts.report["rows"]) CHECK(row["residual"].get<double>() <= 1e-8);

  const auto art = run_experiment(quick("artificial", "sigma: [16]\ntau_steps: 4\n"));
  REQUIRE(art.all_ok());
  for (const auto& p : art.report["rows"][0]["path"])
    for (const auto& v : p["z"]) CHECK(std::abs(v.get<double>()) < 1e-14);
}

TEST_CASE("study gates") {
  const auto m = run_experiment(
      quick("study", "model: {kind: perturbed, A: 0.1}\ndata: {kind: synthetic}\nsigma: [16, 32, 64]\n"));
  CHECK(m.all_ok());
  CHECK(m.table.header == std::vector<std::string>{"quantity", "exponent", "fit_residual", "gate", "status"});
  CHECK(m.table.rows.size() >= 3);
  CHECK_FALSE(m.gates.empty());
}

TEST_CASE("outputs are deterministic") {
  const fs::path dir = fs::temp_directory_path() / "cmclab_test_cli_runner";
  fs::create_directories(dir);
  auto cfg = quick("momentum", "model: {kind: perturbed}\ndata: {kind: synthetic}\nsigma: [16, 32]\n");
  cfg.out = (dir / "a").string();
  write_outputs(run_experiment(cfg));
  cfg.out = (dir / "b").string();
  write_outputs(run_experiment(cfg));
  const auto ja = nlohmann::json::parse(slurp(dir / "a.json"));
  CHECK(ja["schema"] == kReportSchemaVersion);
  CHECK(ja["command"] == "momentum");
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  const auto man = nlohmann::json::parse(slurp(dir / "a.manifest.json"));
  CHECK(man["exit_code"] == 0);
  CHECK(man["stages"].size() >= 3);
  CHECK(man["config"]["command"] == "momentum");
  fs::remove_all(dir);
}

TEST_CASE("number formatting and csv") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(16.0) == "16");
  Table t;
  t.header = {"a", "b"};
  t.add({"1", "x,y"});
  CHECK(t.to_csv() == "a,b\n1,\"x,y\"\n");
}

TEST_CASE("thread configuration") {
  CHECK(configure_threads() >= 1);
}
