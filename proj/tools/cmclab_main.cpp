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

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cmclab/cmclab.h"

namespace {

struct Options {
  std::string config;
  std::vector<std::string> set;
  std::string model, data, sigma, radii, out, log_level;
  int bandlimit = 0, tau_steps = 0, eigen_count = 0, max_newton = 0;
  double newton_tol = 0.0;
  bool check_only = false;
};

void print_line(const char* line, void*) { std::printf("%s\n", line); }

// "8,16,32" or "[8, 16, 32]" -> "[8,16,32]"
std::string as_list(std::string s) {
  if (!s.empty() && s.front() == '[') return s;
  return "[" + s + "]";
}

std::vector<std::string> overrides(const Options& o, const std::string& command) {
  std::vector<std::string> out{"command=" + command};
  if (!o.model.empty()) out.push_back("model=" + o.model);
  if (!o.data.empty()) out.push_back("data=" + o.data);
  if (!o.sigma.empty()) out.push_back("sigma=" + as_list(o.sigma));
  if (!o.radii.empty()) out.push_back("radii=" + as_list(o.radii));
  if (!o.out.empty()) out.push_back("out=" + o.out);
  if (!o.log_level.empty()) out.push_back("log_level=" + o.log_level);
  if (o.bandlimit) out.push_back("bandlimit=" + std::to_string(o.bandlimit));
  if (o.tau_steps) out.push_back("tau_steps=" + std::to_string(o.tau_steps));
  if (o.eigen_count) out.push_back("eigen_count=" + std::to_string(o.eigen_count));
  if (o.max_newton) out.push_back("max_newton=" + std::to_string(o.max_newton));
  if (o.newton_tol > 0.0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "newton_tol=%.17g", o.newton_tol);
    out.emplace_back(buf);
  }
  out.insert(out.end(), o.set.begin(), o.set.end());
  return out;
}

int run(const Options& o, const std::string& command) {
  const auto ov = overrides(o, command);
  std::vector<const char*> argv;
  for (const auto& s : ov) argv.push_back(s.c_str());
  const char* path = o.config.empty() ? nullptr : o.config.c_str();
  if (o.check_only) {
    char* normalized = nullptr;
    const cmclab_status st = cmclab_check_config(path, argv.data(), static_cast<int>(argv.size()), &normalized);
    if (st != CMCLAB_OK) {
      std::fprintf(stderr, "cmclab: %s: %s\n", cmclab_status_name(st), cmclab_last_error());
      return 2;
    }
    std::printf("%s\n", normalized);
    cmclab_string_free(normalized);
    return 0;
  }
  int exit_code = 3;
  const cmclab_status st = cmclab_run(path, argv.data(), static_cast<int>(argv.size()), print_line, nullptr, &exit_code);
  if (st != CMCLAB_OK) std::fprintf(stderr, "cmclab: %s: %s\n", cmclab_status_name(st), cmclab_last_error());
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CMC foliations and centers of mass of asymptotically flat 3-metrics"};
  app.set_version_flag("--version", std::string("cmclab ") + cmclab_version());
  app.require_subcommand(1);

  Options opt;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"foliate", "solve CMC leaves over the sigma schedule"},
      {"centers", "CMC centers against the ADM center"},
      {"adm-center", "ADM center integrals over coordinate spheres"},
      {"momentum", "quasi-local momentum on the leaves"},
      {"eigen", "low eigenvalues of the stability operator"},
      {"evolve", "lapse, center velocity and evolution residual"},
      {"artificial", "center flow through the interpolating spacetime"},
      {"study", "fitted convergence exponents with gates"},
      {"acceptance", "run the acceptance criteria"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", opt.config, "YAML config file (optional)")->check(CLI::ExistingFile);
    sub->add_option("--set", opt.set, "override a key, e.g. --set model.m=2")->type_name("KEY=VALUE");
    sub->add_option("--model", opt.model, "model block as a flow mapping, e.g. '{kind: perturbed, A: 0.1}'");
    sub->add_option("--data", opt.data, "data block as a flow mapping");
    sub->add_option("--sigma", opt.sigma, "sigma schedule, e.g. 16,32,64");
    sub->add_option("--radii", opt.radii, "ADM radii, e.g. 64,128,256");
    sub->add_option("--bandlimit,-L", opt.bandlimit, "spherical harmonic band limit");
    sub->add_option("--newton-tol", opt.newton_tol, "Newton tolerance on sup|H - H_sigma| sigma^2");
    sub->add_option("--max-newton", opt.max_newton, "maximum Newton iterations");
    sub->add_option("--tau-steps", opt.tau_steps, "RK4 steps of the artificial flow");
    sub->add_option("--eigen-count", opt.eigen_count, "number of eigenpairs");
    sub->add_option("--out,-o", opt.out, "output prefix");
    sub->add_option("--log-level", opt.log_level, "quiet, normal or debug");
    sub->add_flag("--check", opt.check_only, "validate the config and print it, do not run");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help and version exit 0; usage errors share the config-error code
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  return run(opt, app.get_subcommands().front()->get_name());
}
