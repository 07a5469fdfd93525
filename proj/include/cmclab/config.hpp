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

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cmclab/cmc_solver.hpp"
#include "cmclab/physics.hpp"

namespace cmclab {

inline constexpr int kConfigSchemaVersion = 1;

struct ModelSpec {
  std::string kind = "schwarzschild";  ///< euclidean | schwarzschild | perturbed
  double m = 1.0;
  double epsilon = 0.5;
  double A = 0.1;
  std::string shape = "odd";
  Vec3 a = Vec3::Zero();  ///< translation
  double tau = 1.0;       ///< interpolation towards the reference model
};

struct DataSpec {
  std::string kind = "time_symmetric";  ///< time_symmetric | synthetic | artificial
  double delta = 1.0;
  double B = 1.0;
  Vec3 b = Vec3::UnitX();
  double tau = 0.0;
  double kbar_scale = 0.5;
};

struct ExperimentConfig {
  int schema = kConfigSchemaVersion;
  std::string command;
  ModelSpec model;
  DataSpec data;
  std::vector<double> sigmas{8.0, 16.0, 32.0};
  std::vector<double> radii;
  SolverConfig solver;
  int tau_steps = 20;
  std::string out = "cmclab_out";
  std::string log_level = "normal";
  CenterMeasure center_measure = CenterMeasure::induced;
  MomentumConvention convention = MomentumConvention::adm;

  nlohmann::json to_json() const;
};

inline const std::vector<std::string> kCommands{"foliate", "centers",    "adm-center", "momentum", "eigen",
                                                "evolve",  "artificial", "study",      "acceptance"};

/// Parses and validates a YAML config. `overrides` are "key=value" pairs
/// (dotted keys for nested blocks) applied before validation. Throws a
/// configuration Error listing every problem found.
ExperimentConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {},
                                   const std::string& source = "<config>");
ExperimentConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {});

MetricPtr build_model(const ModelSpec& cfg);
DataPtr build_data(const DataSpec& cfg, const MetricPtr& model);

}  // namespace cmclab
