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

#include "cmclab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cmclab/errors.hpp"
#include "cmclab/oracles.hpp"
#include "cmclab/physics.hpp"

namespace cmclab {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

CriterionResult start(int id, std::string title) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  return r;
}

const std::vector<double> kSigmas{16.0, 32.0, 64.0, 128.0};
const Vec3 kShift(5.0, 0.0, 0.0);

// Leaves and flows shared by several criteria.
class Context {
 public:
  explicit Context(int band_limit) : L_(band_limit) {
    cfg_.band_limit = band_limit;
    cfg_.eigen_count = 0;
    odd_ = perturbed_schwarzschild(1.0, 0.5, 0.1, "odd");
  }

  const SolverConfig& config() const { return cfg_; }
  int band_limit() const { return L_; }
  const MetricPtr& odd() const { return odd_; }

  const Leaf& odd_leaf(double sigma) {
    auto it = odd_leaves_.find(sigma);
    if (it == odd_leaves_.end()) it = odd_leaves_.emplace(sigma, solve_cmc(*odd_, sigma, cfg_)).first;
    return it->second;
  }

  const ArtificialFlowResult& odd_flow(double sigma, int steps) {
    const auto key = std::make_pair(sigma, steps);
    auto it = flows_.find(key);
    if (it == flows_.end()) it = flows_.emplace(key, artificial_flow_integrate(odd_, sigma, steps, L_)).first;
    return it->second;
  }

 private:
  int L_;
  SolverConfig cfg_;
  MetricPtr odd_;
  std::map<double, Leaf> odd_leaves_;
  std::map<std::pair<double, int>, ArtificialFlowResult> flows_;
};

CriterionResult schwarzschild_oracle(Context& ctx) {
  CriterionResult r = start(1, "Schwarzschild oracle equivalence");
  auto model = schwarzschild(1.0);
  SolverConfig cfg = ctx.config();
  cfg.eigen_count = 3;
  double worst_rel = 0.0, worst_center = 0.0, worst_time = 0.0;
  for (double s : {8.0, 16.0, 32.0}) {
    const auto t0 = Clock::now();
    const Leaf leaf = solve_cmc(*model, s, cfg);
    const double t = seconds_since(t0);
    const double r_star = oracles::schwarzschild_radius(s, 1.0);
    const ScalarField rho = leaf.surface.rho_nodal();
    const double rel = (rho.values().array() - r_star).abs().maxCoeff() / r_star;
    const double off = leaf.surface.center().norm() + leaf.diag.center.norm();
    worst_rel = std::max(worst_rel, rel);
    worst_center = std::max(worst_center, off / s);
    worst_time = std::max(worst_time, t);
    r.data["leaves"].push_back({{"sigma", s}, {"oracle_radius", r_star}, {"rel_error", rel}, {"seconds", t}});
  }
  r.pass = worst_rel <= 1e-8 && worst_center <= 1e-8 && worst_time < 10.0;
  r.detail = fmt::format("max rel radius error {:.2e} (tol 1e-8), max center offset/sigma {:.2e}, slowest solve {:.2f} s",
                         worst_rel, worst_center, worst_time);
  return r;
}

CriterionResult eigenvalue_law(Context& ctx) {
  CriterionResult r = start(2, "Eigenvalue law");
  auto model = schwarzschild(1.0);
  std::vector<double> dev;
  double worst32 = 0.0;
  for (double s : {32.0, 64.0}) {
    const Leaf leaf = solve_cmc(*model, s, ctx.config());
    const auto pairs = low_eigenpairs(leaf.geometry, 3);
    const double ref = 6.0 / (s * s * s);
    double d = 0.0;
    json row{{"sigma", s}, {"reference", ref}};
    for (const auto& p : pairs) {
      d = std::max(d, std::abs(p.lambda / ref - 1.0));
      row["lambda"].push_back(p.lambda);
      row["degree1_fraction"].push_back(p.degree1_fraction);
    }
    row["max_rel_deviation"] = d;
    if (s == 32.0) worst32 = d;
    dev.push_back(d);
    r.data["leaves"].push_back(row);
  }
  r.pass = worst32 <= 0.1 && dev[1] < dev[0];
  r.detail = fmt::format("|lambda sigma^3/6m - 1| = {:.4f} at sigma=32 (tol 0.1), {:.4f} at sigma=64", dev[0], dev[1]);
  return r;
}

CriterionResult evolution_law(Context& ctx) {
  CriterionResult r = start(3, "Evolution law consistency");
  auto base = schwarzschild(1.0);
  auto data = synthetic_data(base, 1.0, 1.0, Vec3::UnitX());
  auto control = time_symmetric_data(base);
  std::vector<double> res;
  double control_res = 0.0;
  for (double s : kSigmas) {
    const Leaf leaf = solve_cmc(*base, s, ctx.config());
    const auto rep = evolution_residual(leaf, *data);
    const auto rc = evolution_residual(leaf, *control);
    res.push_back(rep.residual);
    control_res = std::max(control_res, rc.residual);
    r.data["rows"].push_back({{"sigma", s},
                              {"velocity", vec_json(rep.velocity)},
                              {"prediction", vec_json(rep.prediction)},
                              {"residual", rep.residual},
                              {"residual_direct_sign", rep.residual_direct},
                              {"control_residual", rc.residual}});
  }
  const PowerFit fit = fit_power_law(kSigmas, res);
  r.data["fit"] = {{"exponent", fit.exponent}, {"residual", fit.residual}};
  r.pass = fit.ok && fit.exponent >= 0.7 && fit.residual < kFitResidualGate && control_res <= 1e-8;
  r.detail = fmt::format("residual exponent {:.3f} (>= 0.7), fit residual {:.3f} (< 0.1), time-symmetric residual {:.1e}",
                         fit.exponent, fit.residual, control_res);
  return r;
}

CriterionResult cmc_equals_adm(Context& ctx) {
  CriterionResult r = start(4, "CMC center equals ADM center");
  const auto& model = *ctx.odd();
  std::vector<double> gaps;
  for (double s : kSigmas) {
    const Leaf& leaf = ctx.odd_leaf(s);
    const Vec3 formula = adm_center_from_leaf_formula(model, s, ctx.band_limit());
    gaps.push_back((leaf.diag.center - formula).norm());
    r.data["rows"].push_back({{"sigma", s},
                              {"cmc_center", vec_json(leaf.diag.center)},
                              {"leaf_formula", vec_json(formula)},
                              {"gap", gaps.back()}});
  }
  const PowerFit gap_fit = fit_power_law(kSigmas, gaps);

  const std::vector<double> radii{32.0, 64.0, 128.0, 256.0};
  std::vector<Vec3> adm;
  std::vector<double> rr, inc;
  for (double rho : radii) adm.push_back(adm_center_integral(model, rho, ctx.band_limit()));
  for (std::size_t i = 1; i < radii.size(); ++i) {
    rr.push_back(radii[i]);
    inc.push_back((adm[i] - adm[i - 1]).norm());
  }
  const PowerFit inc_fit = fit_power_law(rr, inc);
  const bool converges = inc_fit.ok && inc_fit.exponent > 0.0 && inc_fit.residual < kFitResidualGate;
  Vec3 extrapolated = adm.back();
  if (converges) {
    for (int c = 0; c < 3; ++c) {
      std::vector<double> y;
      for (const auto& v : adm) y.push_back(v[c]);
      extrapolated[c] = richardson_limit(radii, y);
    }
  }
  const Vec3 z_last = ctx.odd_leaf(kSigmas.back()).diag.center;
  const double final_gap = (z_last - extrapolated).norm();
  for (std::size_t i = 0; i < radii.size(); ++i)
    r.data["adm"].push_back({{"radius", radii[i]}, {"center", vec_json(adm[i])}});
  r.data["gap_fit"] = {{"exponent", gap_fit.exponent}, {"residual", gap_fit.residual}};
  r.data["adm_increment_fit"] = {{"exponent", inc_fit.exponent}, {"residual", inc_fit.residual}};
  r.data["adm_converges"] = converges;
  r.data["final_gap"] = final_gap;

  const bool gap_ok = gap_fit.ok && gap_fit.exponent >= 0.3;
  r.pass = gap_ok && converges && final_gap <= 1e-2;
  r.detail = fmt::format("gap exponent {:.3f} (>= 0.3) {}; ", gap_fit.exponent, gap_ok ? "ok" : "FAIL");
  if (converges) {
    r.detail += fmt::format("extrapolated ADM gap {:.2e} (tol 1e-2)", final_gap);
  } else {
    r.detail += fmt::format("ADM integral does not converge (increments grow like rho^{:.3f}), no extrapolated center",
                            -inc_fit.exponent);
  }
  return r;
}

CriterionResult artificial_flow_check(Context& ctx) {
  CriterionResult r = start(5, "Artificial flow");
  std::vector<double> rel;
  for (double s : {32.0, 64.0}) {
    const auto& flow = ctx.odd_flow(s, 20);
    const Vec3 z = ctx.odd_leaf(s).diag.center;
    rel.push_back((flow.endpoint - z).norm() / z.norm());
    r.data["rows"].push_back(
        {{"sigma", s}, {"flow_endpoint", vec_json(flow.endpoint)}, {"cmc_center", vec_json(z)}, {"rel_gap", rel.back()}});
  }
  const double halving = (ctx.odd_flow(32.0, 40).endpoint - ctx.odd_flow(32.0, 20).endpoint).norm();
  r.data["step_halving"] = halving;
  r.pass = rel[0] <= 5e-2 && rel[1] < rel[0] && halving <= 1e-8;
  r.detail = fmt::format("relative gap {:.3e} at sigma=32 (tol 5e-2), {:.3e} at sigma=64, step halving {:.1e}", rel[0],
                         rel[1], halving);
  return r;
}

CriterionResult equivariance(Context& ctx) {
  CriterionResult r = start(6, "Translation equivariance");
  auto shifted = translated(ctx.odd(), kShift);
  double leaf_err = 0.0;
  for (double s : {16.0, 32.0}) {
    const Leaf leaf = solve_cmc(*shifted, s, ctx.config());
    leaf_err = std::max(leaf_err, (leaf.diag.center - ctx.odd_leaf(s).diag.center - kShift).norm());
  }
  const auto flow = artificial_flow_integrate(shifted, 32.0, 20, ctx.band_limit());
  const double flow_err = (flow.endpoint - ctx.odd_flow(32.0, 20).endpoint - kShift).norm();

  // The unshifted Schwarzschild ADM center vanishes by parity.
  auto sch = schwarzschild(1.0);
  auto sch_shifted = translated(sch, kShift);
  const std::vector<double> radii{512.0, 1024.0, 2048.0, 4096.0, 8192.0};
  Vec3 adm, adm0;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> y, y0;
    for (double rho : radii) {
      y.push_back(adm_center_integral(*sch_shifted, rho, ctx.band_limit())[c]);
      y0.push_back(adm_center_integral(*sch, rho, ctx.band_limit())[c]);
    }
    adm[c] = richardson_limit(radii, y);
    adm0[c] = richardson_limit(radii, y0);
  }
  const double adm_err = (adm - adm0 - kShift).norm();
  r.data = {{"leaf_center_error", leaf_err},
            {"flow_endpoint_error", flow_err},
            {"adm_center", vec_json(adm)},
            {"adm_center_error", adm_err}};
  r.pass = leaf_err <= 1e-8 && flow_err <= 1e-8 && adm_err <= 1e-8;
  r.detail = fmt::format("shift errors: leaf centers {:.1e}, flow endpoint {:.1e}, extrapolated ADM center {:.1e} (tol 1e-8)",
                         leaf_err, flow_err, adm_err);
  return r;
}

CriterionResult almost_concentric(Context& ctx) {
  CriterionResult r = start(7, "Almost concentric leaves");
  std::vector<double> ratio;
  for (double s : kSigmas) {
    const double z = ctx.odd_leaf(s).diag.center.norm();
    ratio.push_back(z / std::sqrt(s));
    r.data["rows"].push_back({{"sigma", s}, {"center_norm", z}, {"ratio", ratio.back()}});
  }
  // ratio ~ sigma^-p; growth means p < 0
  const PowerFit fit = fit_power_law(kSigmas, ratio);
  const double slope = -fit.exponent;
  r.data["slope"] = slope;
  r.pass = fit.ok && slope <= 0.1;
  r.detail = fmt::format("|z|/sigma^(1-eps) in [{:.4f}, {:.4f}], log-log slope {:.3f} (<= 0.1)",
                         *std::min_element(ratio.begin(), ratio.end()), *std::max_element(ratio.begin(), ratio.end()),
                         slope);
  return r;
}

CriterionResult hygiene(Context& ctx) {
  CriterionResult r = start(8, "Numerical hygiene");
  auto grid = SphericalGrid::shared(ctx.band_limit());
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> normal;
  SpectralCoeffs c(grid);
  for (int i = 0; i < c.values().size(); ++i) c.values()[i] = normal(rng);
  const double round_trip = (analyze(synthesize(c)).values() - c.values()).cwiseAbs().maxCoeff();

  const Leaf& leaf = ctx.odd_leaf(16.0);
  const auto& geom = leaf.geometry;
  ScalarField u(grid), v(grid);
  for (int n = 0; n < grid->size(); ++n) {
    const Vec3 d = grid->direction(n);
    u[n] = 1.0 + d.x() * d.y() + 0.3 * d.z() * d.z() * d.z();
    v[n] = d.x() - 0.5 * d.y() * d.z() + 0.2 * d.x() * d.x();
  }
  const ScalarField Lu = stability_operator_apply(geom, u).Lf;
  const ScalarField Lv = stability_operator_apply(geom, v).Lf;
  const double lhs = geom.integrate(u.values().cwiseProduct(Lv.values()));
  const double rhs = geom.integrate(v.values().cwiseProduct(Lu.values()));
  const double scale = std::sqrt(geom.integrate(u.values().cwiseAbs2()) * geom.integrate(Lv.values().cwiseAbs2()));
  const double asym = std::abs(lhs - rhs) / scale;

  ScalarField w(grid);
  for (int n = 0; n < grid->size(); ++n) {
    const Vec3 d = grid->direction(n);
    w[n] = d.x() * d.z() + 0.5 * d.y();
  }
  const std::vector<double> hs{0.4, 0.2, 0.1, 0.05};
  const auto lin = oracles::linearization_check(leaf.surface, *ctx.odd(), w, hs);
  r.data = {{"round_trip", round_trip}, {"self_adjointness", asym}, {"linearization_errors", lin.error},
            {"linearization_h", hs},     {"linearization_order", lin.order}};
  r.pass = round_trip <= 1e-12 && asym <= 1e-8 && lin.order >= 0.9;
  r.detail = fmt::format("round trip {:.1e} (1e-12), self-adjointness {:.1e} (1e-8), linearization order {:.3f} (>= 0.9)",
                         round_trip, asym, lin.order);
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  using Fn = CriterionResult (*)(Context&);
  const std::vector<std::pair<int, Fn>> all{{1, schwarzschild_oracle}, {2, eigenvalue_law},       {3, evolution_law},
                                            {4, cmc_equals_adm},       {5, artificial_flow_check}, {6, equivariance},
                                            {7, almost_concentric},    {8, hygiene}};
  const std::vector<std::string> titles{"Schwarzschild oracle equivalence", "Eigenvalue law",
                                        "Evolution law consistency",       "CMC center equals ADM center",
                                        "Artificial flow",                 "Translation equivariance",
                                        "Almost concentric leaves",        "Numerical hygiene"};
  Context ctx(options.band_limit);
  std::vector<CriterionResult> out;
  for (const auto& [id, fn] : all) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end()) continue;
    const auto t0 = Clock::now();
    CriterionResult res;
    try {
      res = fn(ctx);
    } catch (const std::exception& e) {
      res = start(id, titles[id - 1]);
      res.detail = std::string("error: ") + e.what();
    }
    res.seconds = seconds_since(t0);
    spdlog::debug("criterion {} finished in {:.1f} s", id, res.seconds);
    if (on_result) on_result(res);
    out.push_back(std::move(res));
  }
  return out;
}

std::string format_result_line(const CriterionResult& r) {
  return fmt::format("[{}] criterion {}: {}: {} [{:.1f} s]", r.pass ? "PASS" : "FAIL", r.id, r.title, r.detail,
                     r.seconds);
}

}  // namespace cmclab
