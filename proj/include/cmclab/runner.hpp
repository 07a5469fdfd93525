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

#include "cmclab/config.hpp"

namespace cmclab {

inline constexpr int kReportSchemaVersion = 1;

enum ExitCode : int { exit_ok = 0, exit_failed = 1, exit_config = 2, exit_internal = 3 };

struct StageRecord {
  std::string name;
  bool ok = true;
  double seconds = 0.0;
  std::string error;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string to_csv() const;
};

struct GateRecord {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct RunManifest {
  std::string version;
  ExperimentConfig config;
  std::vector<StageRecord> stages;
  std::vector<GateRecord> gates;
  nlohmann::json report;  ///< deterministic numbers only
  Table table;

  bool all_ok() const;
  int exit_code() const { return all_ok() ? exit_ok : exit_failed; }
  /// Manifest document: version, config echo, stages with timings, gates.
  nlohmann::json manifest_json() const;
  nlohmann::json report_json() const;
};

RunManifest run_experiment(const ExperimentConfig& config);

/// Writes <out>.json, <out>.csv and <out>.manifest.json.
void write_outputs(const RunManifest& manifest);

/// Applies CMCLAB_THREADS (if set) to OpenMP and Eigen; returns the thread count in use.
int configure_threads();
void set_log_level(const std::string& level);

std::string format_number(double v);

}  // namespace cmclab
