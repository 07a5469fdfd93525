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

#include "cmclab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "cmclab/errors.hpp"

namespace cmclab {

namespace {

int edit_distance(const std::string& a, const std::string& b) {
  std::vector<int> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    int diag = row[0];
    row[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

const std::vector<std::string> kModelKeys{"kind", "m", "mass", "epsilon", "A", "shape", "a", "tau"};
const std::vector<std::string> kDataKeys{"kind", "delta", "B", "b", "tau", "kbar_scale"};
const std::vector<std::string> kTopKeys{"schema",      "command",   "model",          "data",
                                        "sigma",       "bandlimit", "newton_tol",     "max_newton",
                                        "recenter_threshold", "sigma_floor", "radii", "tau_steps",
                                        "eigen_count", "out",       "log_level",      "center_measure",
                                        "momentum_convention"};

// Every key with its full dotted path, for suggestions across blocks.
const std::vector<std::pair<std::string, std::string>> kAllKeys = [] {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : kTopKeys) out.emplace_back(k, k);
  for (const auto& k : kModelKeys) out.emplace_back(k, "model." + k);
  for (const auto& k : kDataKeys) out.emplace_back(k, "data." + k);
  return out;
}();

class Validator {
 public:
  explicit Validator(std::string source) : source_(std::move(source)) {}

  void error(const YAML::Node& at, const std::string& key, const std::string& msg) {
    std::ostringstream os;
    os << source_;
    if (at.IsDefined() && at.Mark().line >= 0) os << ":" << at.Mark().line + 1 << ":" << at.Mark().column + 1;
    os << ": '" << key << "' " << msg;
    errors_.push_back(os.str());
  }

  void check_keys(const YAML::Node& map, const std::string& prefix, const std::vector<std::string>& allowed) {
    for (auto it = map.begin(); it != map.end(); ++it) {
      const auto key = it->first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
      std::string best;
      int best_d = std::numeric_limits<int>::max();
      for (const auto& a : allowed) {
        const int d = edit_distance(key, a);
        if (d < best_d) best_d = d, best = prefix + a;
      }
      for (const auto& [bare, full] : kAllKeys) {
        const int d = edit_distance(key, bare);
        if (d < best_d) best_d = d, best = full;
      }
      std::string msg = "is not a known key";
      if (best_d <= 2) msg += " (did you mean '" + best + "'?)";
      error(it->first, prefix + key, msg);
    }
  }

  template <class T>
  bool read(const YAML::Node& map, const std::string& key, const std::string& name, T& out) {
    const YAML::Node n = map[key];
    if (!n.IsDefined() || n.IsNull()) return false;
    try {
      out = n.as<T>();
      return true;
    } catch (const YAML::Exception&) {
      error(n, name, std::string("has the wrong type (expected ") + type_name<T>() + ")");
      return false;
    }
  }

  void range(const YAML::Node& map, const std::string& key, const std::string& name, double v, double lo,
             double hi, bool lo_open = false, bool hi_open = false) {
    const bool bad = !std::isfinite(v) || (lo_open ? v <= lo : v < lo) || (hi_open ? v >= hi : v > hi);
    if (!bad) return;
    std::ostringstream os;
    os << "= " << v << " is out of range " << (lo_open ? "(" : "[") << lo << ", " << hi << (hi_open ? ")" : "]");
    error(map[key], name, os.str());
  }

  void one_of(const YAML::Node& map, const std::string& key, const std::string& name, const std::string& v,
              const std::vector<std::string>& options) {
    if (std::find(options.begin(), options.end(), v) != options.end()) return;
    std::string list;
    for (const auto& o : options) list += (list.empty() ? "" : ", ") + o;
    error(map[key], name, "= '" + v + "' must be one of: " + list);
  }

  bool vec3(const YAML::Node& map, const std::string& key, const std::string& name, Vec3& out) {
    std::vector<double> v;
    if (!read(map, key, name, v)) return false;
    if (v.size() != 3) {
      error(map[key], name, "must be a list of 3 numbers");
      return false;
    }
    out = Vec3(v[0], v[1], v[2]);
    return true;
  }

  void raise() const {
    if (errors_.empty()) return;
    std::string msg = "invalid configuration (" + std::to_string(errors_.size()) + " error" +
                      (errors_.size() > 1 ? "s" : "") + "):";
    for (const auto& e : errors_) msg += "\n  " + e;
    fail(ErrorKind::configuration, msg);
  }

 private:
  template <class T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, int>) return "integer";
    else if constexpr (std::is_same_v<T, double>) return "number";
    else if constexpr (std::is_same_v<T, std::string>) return "string";
    else return "list of numbers";
  }

  std::string source_;
  std::vector<std::string> errors_;
};

void apply_override(YAML::Node& root, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) fail(ErrorKind::configuration, "override '" + item + "' is not key=value");
  const std::string key = item.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(item.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::configuration, "override '" + item + "': " + e.msg);
  }
  const auto dot = key.find('.');
  if (dot == std::string::npos) {
    YAML::Node existing = root[key];
    if (existing.IsDefined() && existing.IsMap() && value.IsMap()) {
      for (auto it = value.begin(); it != value.end(); ++it) existing[it->first.as<std::string>()] = it->second;
    } else {
      root[key] = value;
    }
    return;
  }
  YAML::Node block = root[key.substr(0, dot)];
  if (!block.IsDefined() || block.IsNull()) root[key.substr(0, dot)] = YAML::Node(YAML::NodeType::Map);
  block = root[key.substr(0, dot)];
  if (!block.IsMap()) fail(ErrorKind::configuration, "override '" + item + "': '" + key.substr(0, dot) + "' is not a block");
  block[key.substr(dot + 1)] = value;
}

void parse_model(Validator& v, const YAML::Node& n, ModelSpec& s) {
  v.check_keys(n, "model.", kModelKeys);
  if (n["m"].IsDefined() && n["mass"].IsDefined()) v.error(n["mass"], "model.mass", "duplicates 'model.m'");
  v.read(n, "kind", "model.kind", s.kind);
  v.one_of(n, "kind", "model.kind", s.kind, {"euclidean", "schwarzschild", "perturbed"});
  if (v.read(n, "m", "model.m", s.m)) v.range(n, "m", "model.m", s.m, 0.0, 1e6);
  if (v.read(n, "mass", "model.mass", s.m)) v.range(n, "mass", "model.mass", s.m, 0.0, 1e6);
  if (v.read(n, "epsilon", "model.epsilon", s.epsilon)) v.range(n, "epsilon", "model.epsilon", s.epsilon, 0.0, 1.0, true);
  if (v.read(n, "A", "model.A", s.A)) v.range(n, "A", "model.A", s.A, -1e3, 1e3);
  if (v.read(n, "shape", "model.shape", s.shape)) v.one_of(n, "shape", "model.shape", s.shape, {"even", "odd"});
  v.vec3(n, "a", "model.a", s.a);
  if (v.read(n, "tau", "model.tau", s.tau)) v.range(n, "tau", "model.tau", s.tau, 0.0, 1.0);
  if (s.kind == "euclidean") s.m = 0.0;
}

void parse_data(Validator& v, const YAML::Node& n, DataSpec& s) {
  v.check_keys(n, "data.", kDataKeys);
  v.read(n, "kind", "data.kind", s.kind);
  v.one_of(n, "kind", "data.kind", s.kind, {"time_symmetric", "synthetic", "artificial"});
  if (v.read(n, "delta", "data.delta", s.delta)) v.range(n, "delta", "data.delta", s.delta, 0.0, 1.0, true);
  if (v.read(n, "B", "data.B", s.B)) v.range(n, "B", "data.B", s.B, -1e3, 1e3);
  if (v.vec3(n, "b", "data.b", s.b) && std::abs(s.b.norm() - 1.0) > 1e-12)
    v.error(n["b"], "data.b", "must be a unit vector");
  if (v.read(n, "tau", "data.tau", s.tau)) v.range(n, "tau", "data.tau", s.tau, 0.0, 1.0);
  if (v.read(n, "kbar_scale", "data.kbar_scale", s.kbar_scale))
    v.range(n, "kbar_scale", "data.kbar_scale", s.kbar_scale, 0.0, 1e3, true);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides,
                                   const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    fail(ErrorKind::configuration, source + ":" + std::to_string(e.mark.line + 1) + ":" +
                                       std::to_string(e.mark.column + 1) + ": malformed syntax: " + e.msg);
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) fail(ErrorKind::configuration, source + ": top level must be a mapping");
  for (const auto& o : overrides) apply_override(root, o);

  Validator v(source);
  ExperimentConfig c;
  v.check_keys(root, "", kTopKeys);
  if (v.read(root, "schema", "schema", c.schema) && c.schema != kConfigSchemaVersion)
    v.error(root["schema"], "schema", "= " + std::to_string(c.schema) + " is not supported (expected " +
                                          std::to_string(kConfigSchemaVersion) + ")");
  if (!v.read(root, "command", "command", c.command)) {
    v.error(root, "command", "is required");
  } else {
    v.one_of(root, "command", "command", c.command, kCommands);
  }
  if (root["model"].IsDefined()) {
    if (root["model"].IsMap()) parse_model(v, root["model"], c.model);
    else v.error(root["model"], "model", "must be a mapping");
  }
  if (root["data"].IsDefined()) {
    if (root["data"].IsMap()) parse_data(v, root["data"], c.data);
    else v.error(root["data"], "data", "must be a mapping");
  }
  if (v.read(root, "sigma", "sigma", c.sigmas)) {
    if (c.sigmas.empty()) v.error(root["sigma"], "sigma", "must not be empty");
    for (std::size_t i = 0; i < c.sigmas.size(); ++i) {
      if (!(c.sigmas[i] > 0.0)) v.error(root["sigma"], "sigma", "values must be positive");
      if (i > 0 && !(c.sigmas[i] > c.sigmas[i - 1])) v.error(root["sigma"], "sigma", "must be strictly increasing");
    }
  }
  if (v.read(root, "radii", "radii", c.radii)) {
    for (std::size_t i = 0; i < c.radii.size(); ++i) {
      if (!(c.radii[i] > 0.0)) v.error(root["radii"], "radii", "values must be positive");
      if (i > 0 && !(c.radii[i] > c.radii[i - 1])) v.error(root["radii"], "radii", "must be strictly increasing");
    }
  }
  auto& s = c.solver;
  if (v.read(root, "bandlimit", "bandlimit", s.band_limit)) v.range(root, "bandlimit", "bandlimit", s.band_limit, 4, 128);
  if (v.read(root, "newton_tol", "newton_tol", s.newton_tol))
    v.range(root, "newton_tol", "newton_tol", s.newton_tol, 0.0, 1.0, true);
  if (v.read(root, "max_newton", "max_newton", s.max_newton)) v.range(root, "max_newton", "max_newton", s.max_newton, 1, 1000);
  if (v.read(root, "recenter_threshold", "recenter_threshold", s.recenter_threshold))
    v.range(root, "recenter_threshold", "recenter_threshold", s.recenter_threshold, 0.0, 1.0, true);
  if (v.read(root, "sigma_floor", "sigma_floor", s.sigma_floor_factor))
    v.range(root, "sigma_floor", "sigma_floor", s.sigma_floor_factor, 0.0, 1e6);
  if (v.read(root, "eigen_count", "eigen_count", s.eigen_count))
    v.range(root, "eigen_count", "eigen_count", s.eigen_count, 0, 10);
  if (v.read(root, "tau_steps", "tau_steps", c.tau_steps)) v.range(root, "tau_steps", "tau_steps", c.tau_steps, 1, 100000);
  if (v.read(root, "out", "out", c.out) && c.out.empty()) v.error(root["out"], "out", "must not be empty");
  if (v.read(root, "log_level", "log_level", c.log_level))
    v.one_of(root, "log_level", "log_level", c.log_level, {"quiet", "normal", "debug"});
  std::string measure;
  if (v.read(root, "center_measure", "center_measure", measure)) {
    v.one_of(root, "center_measure", "center_measure", measure, {"induced", "euclidean"});
    c.center_measure = measure == "euclidean" ? CenterMeasure::euclidean : CenterMeasure::induced;
  }
  std::string conv;
  if (v.read(root, "momentum_convention", "momentum_convention", conv)) {
    v.one_of(root, "momentum_convention", "momentum_convention", conv, {"adm", "direct"});
    c.convention = conv == "direct" ? MomentumConvention::direct : MomentumConvention::adm;
  }
  if (c.command == "study" && c.sigmas.size() < 3)
    v.error(root["sigma"], "sigma", "needs at least 3 values for a convergence study");
  if (c.command == "adm-center" && c.radii.size() < 2)
    v.error(root["radii"], "radii", "needs at least 2 values for adm-center");
  v.raise();
  return c;
}

ExperimentConfig parse_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides, path);
}

nlohmann::json ExperimentConfig::to_json() const {
  using nlohmann::json;
  auto v3 = [](const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); };
  return json{
      {"schema", schema},
      {"command", command},
      {"model",
       {{"kind", model.kind},
        {"m", model.m},
        {"epsilon", model.epsilon},
        {"A", model.A},
        {"shape", model.shape},
        {"a", v3(model.a)},
        {"tau", model.tau}}},
      {"data",
       {{"kind", data.kind},
        {"delta", data.delta},
        {"B", data.B},
        {"b", v3(data.b)},
        {"tau", data.tau},
        {"kbar_scale", data.kbar_scale}}},
      {"sigma", sigmas},
      {"radii", radii},
      {"bandlimit", solver.band_limit},
      {"newton_tol", solver.newton_tol},
      {"max_newton", solver.max_newton},
      {"recenter_threshold", solver.recenter_threshold},
      {"sigma_floor", solver.sigma_floor_factor},
      {"eigen_count", solver.eigen_count},
      {"tau_steps", tau_steps},
      {"out", out},
      {"log_level", log_level},
      {"center_measure", center_measure == CenterMeasure::euclidean ? "euclidean" : "induced"},
      {"momentum_convention", convention == MomentumConvention::direct ? "direct" : "adm"},
  };
}

MetricPtr build_model(const ModelSpec& cfg) {
  MetricPtr m;
  if (cfg.kind == "euclidean") m = euclidean();
  else if (cfg.kind == "schwarzschild") m = schwarzschild(cfg.m);
  else if (cfg.kind == "perturbed") m = perturbed_schwarzschild(cfg.m, cfg.epsilon, cfg.A, cfg.shape);
  else fail(ErrorKind::model, "unknown model kind '" + cfg.kind + "'");
  if (cfg.tau != 1.0) m = interpolated(m, cfg.tau);
  if (cfg.a != Vec3::Zero()) m = translated(m, cfg.a);
  return m;
}

DataPtr build_data(const DataSpec& cfg, const MetricPtr& model) {
  if (cfg.kind == "time_symmetric") return time_symmetric_data(model);
  if (cfg.kind == "synthetic") return synthetic_data(model, cfg.delta, cfg.B, cfg.b);
  if (cfg.kind == "artificial") return artificial_data(model, cfg.tau, cfg.kbar_scale);
  fail(ErrorKind::model, "unknown data kind '" + cfg.kind + "'");
}

}  // namespace cmclab
