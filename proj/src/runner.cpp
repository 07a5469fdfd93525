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

#include "cmclab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cmclab/acceptance.hpp"
#include "cmclab/errors.hpp"

namespace cmclab {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::string str(double v) { return format_number(v); }

template <class F>
bool stage(RunManifest& m, const std::string& name, F&& f) {
  StageRecord rec;
  rec.name = name;
  const auto t0 = Clock::now();
  try {
    f();
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
    spdlog::error("stage {} failed: {}", name, e.what());
  }
  rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  spdlog::info("stage {} {} ({:.2f} s)", name, rec.ok ? "done" : "FAILED", rec.seconds);
  m.stages.push_back(rec);
  return rec.ok;
}

json leaf_json(const Leaf& leaf) {
  return json{{"sigma", leaf.sigma},
              {"H_target", leaf.H_target},
              {"center", vec_json(leaf.diag.center)},
              {"area_radius", leaf.diag.area_radius},
              {"residual", leaf.diag.residual},
              {"iterations", leaf.diag.iterations},
              {"recenterings", leaf.diag.recenterings},
              {"kring_sup", leaf.diag.kring_sup},
              {"rcond", leaf.diag.rcond},
              {"eigenvalues", leaf.diag.eigenvalues},
              {"surface", json::parse(leaf.surface.to_json())}};
}

json fit_json(const PowerFit& f) {
  return json{{"exponent", f.exponent}, {"prefactor", f.prefactor}, {"residual", f.residual}, {"points", f.points},
              {"ok", f.ok}};
}

SolverConfig solver_without_eigen(const ExperimentConfig& c) {
  SolverConfig s = c.solver;
  s.eigen_count = 0;
  return s;
}

void run_foliate(RunManifest& m, const MetricPtr& model) {
  const auto& c = m.config;
  m.table.header = {"sigma", "H_target", "area_radius", "center_x", "center_y", "center_z", "residual", "iterations"};
  for (int i = 0; i < c.solver.eigen_count; ++i) m.table.header.push_back("lambda_" + std::to_string(i + 1));
  FoliationResult fol;
  stage(m, "foliation", [&] {
    fol = solve_foliation(*model, c.sigmas, c.solver);
    if (!fol.complete) fail(ErrorKind::solver, fol.failure);
  });
  json leaves = json::array();
  for (const auto& leaf : fol.leaves) {
    leaves.push_back(leaf_json(leaf));
    std::vector<std::string> row{str(leaf.sigma),         str(leaf.H_target),       str(leaf.diag.area_radius),
                                 str(leaf.diag.center.x()), str(leaf.diag.center.y()), str(leaf.diag.center.z()),
                                 str(leaf.diag.residual),   std::to_string(leaf.diag.iterations)};
    for (int i = 0; i < c.solver.eigen_count; ++i)
      row.push_back(i < static_cast<int>(leaf.diag.eigenvalues.size()) ? str(leaf.diag.eigenvalues[i]) : "");
    m.table.add(row);
  }
  m.report["leaves"] = leaves;
  m.report["nested"] = fol.nested;
  m.report["complete"] = fol.complete;
  if (!fol.complete) m.report["failed_sigma"] = fol.failed_sigma;
}

void run_centers(RunManifest& m, const MetricPtr& model) {
  const auto& c = m.config;
  m.table.header = {"sigma",          "cmc_x",          "cmc_y", "cmc_z", "formula_x",
                    "formula_y",      "formula_z",      "gap"};
  const std::vector<double> radii = c.radii.empty() ? c.sigmas : c.radii;
  stage(m, "centers", [&] {
    const CenterReport rep = center_report(*model, c.sigmas, radii, c.solver);
    json rows = json::array();
    for (std::size_t i = 0; i < rep.sigmas.size(); ++i) {
      const double gap = (rep.cmc_centers[i] - rep.leaf_formula[i]).norm();
      rows.push_back({{"sigma", rep.sigmas[i]},
                      {"cmc_center", vec_json(rep.cmc_centers[i])},
                      {"leaf_formula", vec_json(rep.leaf_formula[i])},
                      {"gap", gap}});
      const Vec3& z = rep.cmc_centers[i];
      const Vec3& f = rep.leaf_formula[i];
      m.table.add({str(rep.sigmas[i]), str(z.x()), str(z.y()), str(z.z()), str(f.x()), str(f.y()), str(f.z()), str(gap)});
    }
    json adm = json::array();
    for (std::size_t i = 0; i < rep.radii.size(); ++i)
      adm.push_back({{"radius", rep.radii[i]}, {"center", vec_json(rep.adm_integrals[i])}});
    m.report["rows"] = rows;
    m.report["adm"] = adm;
    m.report["adm_converges"] = rep.adm_converges;
    m.report["adm_extrapolated"] = vec_json(rep.adm_extrapolated);
    m.report["adm_increment_fit"] = fit_json(rep.adm_increment_fit);
    m.report["gap_fit"] = fit_json(rep.gap_fit);
    m.report["growth_fit"] = fit_json(rep.growth_fit);
    m.report["final_gap"] = rep.final_gap;
  });
}

void run_adm(RunManifest& m, const MetricPtr& model) {
  const auto& c = m.config;
  m.table.header = {"radius", "x", "y", "z"};
  std::vector<double> radii;
  std::vector<Vec3> vals;
  for (double rho : c.radii) {
    stage(m, fmt::format("adm rho={}", str(rho)), [&] {
      const Vec3 v = adm_center_integral(*model, rho, c.solver.band_limit);
      radii.push_back(rho);
      vals.push_back(v);
      m.table.add({str(rho), str(v.x()), str(v.y()), str(v.z())});
    });
  }
  json rows = json::array();
  for (std::size_t i = 0; i < radii.size(); ++i) rows.push_back({{"radius", radii[i]}, {"center", vec_json(vals[i])}});
  m.report["rows"] = rows;
  if (radii.size() >= 2) {
    std::vector<double> rr, inc;
    for (std::size_t i = 1; i < radii.size(); ++i) {
      rr.push_back(radii[i]);
      inc.push_back((vals[i] - vals[i - 1]).norm());
    }
    const PowerFit fit = fit_power_law(rr, inc);
    const double max_inc = *std::max_element(inc.begin(), inc.end());
    const bool converges = max_inc < 1e-12 || (fit.ok && fit.exponent > 0.0 && fit.residual < kFitResidualGate);
    m.report["increment_fit"] = fit_json(fit);
    m.report["converges"] = converges;
    if (converges) {
      Vec3 lim;
      for (int k = 0; k < 3; ++k) {
        std::vector<double> y;
        for (const auto& v : vals) y.push_back(v[k]);
        lim[k] = richardson_limit(radii, y);
      }
      m.report["extrapolated"] = vec_json(lim);
    } else {
      m.report["extrapolated"] = nullptr;
    }
  }
}

template <class F>
void per_leaf(RunManifest& m, const MetricPtr& model, const SolverConfig& solver, F&& body) {
  std::optional<SurfaceEmbedding> guess;
  double prev = 0.0;
  for (double s : m.config.sigmas) {
    stage(m, fmt::format("sigma={}", str(s)), [&] {
      const Leaf leaf = solve_cmc(*model, s, solver, guess ? std::optional(guess->scaled(s / prev)) : std::nullopt);
      guess = leaf.surface;
      prev = s;
      body(leaf);
    });
  }
}

void run_momentum(RunManifest& m, const MetricPtr& model, const DataPtr& data) {
  m.table.header = {"sigma", "P_x", "P_y", "P_z", "C_x", "C_y", "C_z", "pseudo_x", "pseudo_y", "pseudo_z"};
  json rows = json::array();
  per_leaf(m, model, solver_without_eigen(m.config), [&](const Leaf& leaf) {
    const auto rep = quasi_local_momentum(leaf.geometry, leaf.sigma, *data, m.config.convention);
    rows.push_back({{"sigma", leaf.sigma},
                    {"quasi_local", vec_json(rep.quasi_local)},
                    {"correction", vec_json(rep.correction)},
                    {"pseudo", vec_json(rep.pseudo)},
                    {"pseudo_direct", vec_json(rep.pseudo_direct)},
                    {"pseudo_adm", vec_json(rep.pseudo_adm)},
                    {"flux_sup", rep.flux_sup},
                    {"correction_sup", rep.correction_sup}});
    m.table.add({str(leaf.sigma), str(rep.quasi_local.x()), str(rep.quasi_local.y()), str(rep.quasi_local.z()),
                 str(rep.correction.x()), str(rep.correction.y()), str(rep.correction.z()), str(rep.pseudo.x()),
                 str(rep.pseudo.y()), str(rep.pseudo.z())});
  });
  m.report["rows"] = rows;
}

void run_eigen(RunManifest& m, const MetricPtr& model) {
  m.table.header = {"sigma", "index", "lambda", "lambda_sigma3_over_6m", "degree1_fraction"};
  const int count = std::max(1, m.config.solver.eigen_count);
  const double mass = model->mass();
  json rows = json::array();
  per_leaf(m, model, solver_without_eigen(m.config), [&](const Leaf& leaf) {
    const auto pairs = low_eigenpairs(leaf.geometry, count);
    const double s3 = leaf.sigma * leaf.sigma * leaf.sigma;
    json lam = json::array(), frac = json::array();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const double ratio = mass > 0.0 ? pairs[i].lambda * s3 / (6.0 * mass) : std::numeric_limits<double>::quiet_NaN();
      lam.push_back(pairs[i].lambda);
      frac.push_back(pairs[i].degree1_fraction);
      m.table.add({str(leaf.sigma), std::to_string(i + 1), str(pairs[i].lambda), mass > 0.0 ? str(ratio) : "",
                   str(pairs[i].degree1_fraction)});
    }
    rows.push_back({{"sigma", leaf.sigma}, {"lambda", lam}, {"degree1_fraction", frac}});
  });
  m.report["rows"] = rows;
}

void run_evolve(RunManifest& m, const MetricPtr& model, const DataPtr& data) {
  m.table.header = {"sigma",        "velocity_x", "velocity_y", "velocity_z", "prediction_x",
                    "prediction_y", "prediction_z", "residual", "residual_direct", "w_w1inf"};
  json rows = json::array();
  per_leaf(m, model, solver_without_eigen(m.config), [&](const Leaf& leaf) {
    const auto rep = evolution_residual(leaf, *data, m.config.convention, m.config.center_measure);
    rows.push_back({{"sigma", leaf.sigma},
                    {"velocity", vec_json(rep.velocity)},
                    {"prediction", vec_json(rep.prediction)},
                    {"residual", rep.residual},
                    {"residual_direct", rep.residual_direct},
                    {"w_w1inf", rep.w_w1inf},
                    {"w_l2", rep.w_l2},
                    {"rhs_sup", rep.rhs_sup}});
    m.table.add({str(leaf.sigma), str(rep.velocity.x()), str(rep.velocity.y()), str(rep.velocity.z()),
                 str(rep.prediction.x()), str(rep.prediction.y()), str(rep.prediction.z()), str(rep.residual),
                 str(rep.residual_direct), str(rep.w_w1inf)});
  });
  m.report["rows"] = rows;
}

void run_artificial(RunManifest& m, const MetricPtr& model) {
  const auto& c = m.config;
  m.table.header = {"sigma", "tau", "z_x", "z_y", "z_z"};
  json rows = json::array();
  for (double s : c.sigmas) {
    stage(m, fmt::format("flow sigma={}", str(s)), [&] {
      const auto flow =
          artificial_flow_integrate(model, s, c.tau_steps, c.solver.band_limit, c.data.kbar_scale, c.convention);
      const Leaf leaf = solve_cmc(*model, s, solver_without_eigen(c));
      json path = json::array();
      for (std::size_t i = 0; i < flow.tau.size(); ++i) {
        path.push_back({{"tau", flow.tau[i]}, {"z", vec_json(flow.path[i])}});
        m.table.add({str(s), str(flow.tau[i]), str(flow.path[i].x()), str(flow.path[i].y()), str(flow.path[i].z())});
      }
      const double gap = (flow.endpoint - leaf.diag.center).norm();
      rows.push_back({{"sigma", s},
                      {"endpoint", vec_json(flow.endpoint)},
                      {"cmc_center", vec_json(leaf.diag.center)},
                      {"gap", gap},
                      {"path", path}});
    });
  }
  m.report["rows"] = rows;
}

void add_fit_row(RunManifest& m, const std::string& quantity, const PowerFit& fit, const std::string& gate,
                 std::optional<bool> pass) {
  m.table.add({quantity, str(fit.exponent), str(fit.residual), gate, pass ? (*pass ? "pass" : "fail") : ""});
  m.report["fits"].push_back({{"quantity", quantity}, {"fit", fit_json(fit)}, {"gate", gate},
                              {"pass", pass ? json(*pass) : json(nullptr)}});
  if (pass) m.gates.push_back({quantity, *pass, gate});
}

void run_study(RunManifest& m, const MetricPtr& model, const DataPtr& data) {
  const auto& c = m.config;
  m.table.header = {"quantity", "exponent", "fit_residual", "gate", "status"};
  m.report["fits"] = json::array();
  const double mass = model->mass();
  const double eps = model->decay().epsilon;
  std::vector<double> sig, eig_dev, center, gap, evo;
  per_leaf(m, model, solver_without_eigen(c), [&](const Leaf& leaf) {
    sig.push_back(leaf.sigma);
    center.push_back(leaf.diag.center.norm());
    if (mass > 0.0) {
      const double s3 = leaf.sigma * leaf.sigma * leaf.sigma;
      double d = 0.0;
      for (const auto& p : low_eigenpairs(leaf.geometry, 3)) d = std::max(d, std::abs(p.lambda * s3 / (6.0 * mass) - 1.0));
      eig_dev.push_back(d);
      gap.push_back((leaf.diag.center - adm_center_from_leaf_formula(*model, leaf.sigma, c.solver.band_limit)).norm());
    }
    if (!data->time_symmetric() && mass > 0.0) evo.push_back(evolution_residual(leaf, *data, c.convention, c.center_measure).residual);
  });
  if (sig.size() != c.sigmas.size()) {
    m.report["complete"] = false;
    return;
  }
  m.report["complete"] = true;
  m.report["sigma"] = sig;
  if (!eig_dev.empty()) {
    m.report["eigen_deviation"] = eig_dev;
    add_fit_row(m, "eigen_deviation", fit_power_law(sig, eig_dev), "reported", std::nullopt);
  }
  const double zmax = *std::max_element(center.begin(), center.end());
  m.report["center_norm"] = center;
  if (zmax > 1e-10) {
    // |z| ~ sigma^q with q = -exponent; allowed q <= 1 - eps (+0.1 for preasymptotic drift)
    const PowerFit fit = fit_power_law(sig, center);
    const double q = -fit.exponent;
    add_fit_row(m, "center_growth", fit, fmt::format("growth {:.3f} <= {:.3f}", q, 1.0 - eps + 0.1),
                fit.ok && q <= 1.0 - eps + 0.1);
    m.report["center_gap"] = gap;
    if (!gap.empty()) add_fit_row(m, "center_formula_gap", fit_power_law(sig, gap), "reported", std::nullopt);
  }
  if (!evo.empty()) {
    const double need = std::min(eps, data->delta()) - 0.3;
    const PowerFit fit = fit_power_law(sig, evo);
    m.report["evolution_residual"] = evo;
    add_fit_row(m, "evolution_residual", fit, fmt::format("exponent >= {:.3f}, fit residual < {}", need, kFitResidualGate),
                fit.ok && fit.exponent >= need && fit.residual < kFitResidualGate);
  }
}

void run_acceptance_cmd(RunManifest& m) {
  m.table.header = {"criterion", "title", "status", "seconds", "detail"};
  AcceptanceOptions opt;
  opt.band_limit = m.config.solver.band_limit;
  std::vector<CriterionResult> results;
  stage(m, "acceptance", [&] {
    results = run_acceptance(opt, [](const CriterionResult& r) { spdlog::info("{}", format_result_line(r)); });
  });
  json rows = json::array();
  for (const auto& r : results) {
    rows.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}, {"data", r.data}});
    m.table.add({std::to_string(r.id), r.title, r.pass ? "pass" : "fail", fmt::format("{:.2f}", r.seconds), r.detail});
    m.gates.push_back({fmt::format("criterion {}", r.id), r.pass, r.detail});
  }
  m.report["criteria"] = rows;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(ErrorKind::io, "write failed for '" + path + "'");
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

std::string Table::to_csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_escape(cells[i]);
    out += "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

bool RunManifest::all_ok() const {
  return std::all_of(stages.begin(), stages.end(), [](const StageRecord& s) { return s.ok; }) &&
         std::all_of(gates.begin(), gates.end(), [](const GateRecord& g) { return g.pass; });
}

json RunManifest::report_json() const {
  json out{{"schema", kReportSchemaVersion}, {"command", config.command}};
  out["report"] = report;
  return out;
}

json RunManifest::manifest_json() const {
  json stages_j = json::array(), gates_j = json::array();
  for (const auto& s : stages)
    stages_j.push_back({{"name", s.name}, {"ok", s.ok}, {"seconds", s.seconds}, {"error", s.error}});
  for (const auto& g : gates) gates_j.push_back({{"name", g.name}, {"pass", g.pass}, {"detail", g.detail}});
  return json{{"schema", kReportSchemaVersion},
              {"tool", "cmclab"},
              {"version", version},
              {"config", config.to_json()},
              {"stages", stages_j},
              {"gates", gates_j},
              {"exit_code", exit_code()},
              {"outputs", {config.out + ".json", config.out + ".csv"}}};
}

RunManifest run_experiment(const ExperimentConfig& config) {
  RunManifest m;
  m.version = CMCLAB_VERSION;
  m.config = config;
  m.report = json::object();
  MetricPtr model;
  DataPtr data;
  if (config.command != "acceptance") {
    const bool built = stage(m, "build model", [&] {
      model = build_model(config.model);
      data = build_data(config.data, model);
    });
    if (!built) return m;
  }
  const auto& cmd = config.command;
  if (cmd == "foliate") run_foliate(m, model);
  else if (cmd == "centers") run_centers(m, model);
  else if (cmd == "adm-center") run_adm(m, model);
  else if (cmd == "momentum") run_momentum(m, model, data);
  else if (cmd == "eigen") run_eigen(m, model);
  else if (cmd == "evolve") run_evolve(m, model, data);
  else if (cmd == "artificial") run_artificial(m, model);
  else if (cmd == "study") run_study(m, model, data);
  else if (cmd == "acceptance") run_acceptance_cmd(m);
  else fail(ErrorKind::configuration, "unknown command '" + cmd + "'");
  return m;
}

void write_outputs(const RunManifest& m) {
  const std::string& out = m.config.out;
  write_file(out + ".json", m.report_json().dump(2) + "\n");
  write_file(out + ".csv", m.table.to_csv());
  write_file(out + ".manifest.json", m.manifest_json().dump(2) + "\n");
}

int configure_threads() {
  int n = 0;
  if (const char* env = std::getenv("CMCLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 4096)
      fail(ErrorKind::configuration, std::string("CMCLAB_THREADS must be a positive integer, got '") + env + "'");
    n = static_cast<int>(v);
  }
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
  n = omp_get_max_threads();
#else
  if (n == 0) n = 1;
#endif
  Eigen::setNbThreads(n);
  return n;
}

void set_log_level(const std::string& level) {
  static const bool installed = [] {
    auto logger = spdlog::stderr_color_mt("cmclab");
    logger->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    spdlog::set_default_logger(logger);
    return true;
  }();
  (void)installed;
  if (level == "quiet") spdlog::set_level(spdlog::level::warn);
  else if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else spdlog::set_level(spdlog::level::info);
}

}  // namespace cmclab
