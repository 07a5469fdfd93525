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
#include <numbers>

#include "doctest.h"
#include "approx.hpp"
#include "cmclab/errors.hpp"
#include "cmclab/fits.hpp"
#include "cmclab/oracles.hpp"
#include "cmclab/physics.hpp"

using namespace cmclab;
constexpr double kPi = std::numbers::pi;

namespace {

SolverConfig config(int L = 16) {
  SolverConfig c;
  c.band_limit = L;
  c.eigen_count = 0;
  return c;
}

double sup(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

DataPtr synthetic(double B = 1.0) { return synthetic_data(schwarzschild(1.0), 1.0, B, Vec3::UnitX()); }

}  // namespace

TEST_CASE("quasi-local momentum") {
  auto sch = schwarzschild(1.0);
  const Leaf leaf = solve_cmc(*sch, 16.0, config());
  const auto zero = quasi_local_momentum(leaf.geometry, 16.0, *time_symmetric_data(sch));
  CHECK(zero.quasi_local.norm() == 0.0);
  CHECK(zero.correction.norm() == 0.0);
  CHECK(zero.pseudo.norm() == 0.0);

  // pure trace kbar: Pi = 2c gbar, and the integral of nu_i vanishes by symmetry
  const InitialDataModel trace(sch, pure_trace_extrinsic(sch, 0.01), LapseKind::schwarzschild);
  const auto pt = quasi_local_momentum(leaf.geometry, 16.0, trace);
  CHECK(pt.flux_sup > 1e-3);
  CHECK(pt.quasi_local.norm() < 1e-12);

  // synthetic data against a finer quadrature of the same integrand
  const Leaf coarse = solve_cmc(*sch, 16.0, config(12));
  const auto data = synthetic();
  const auto p = quasi_local_momentum(coarse.geometry, 16.0, *data);
  CHECK(std::abs(p.quasi_local.x()) > 1e-3);
  CHECK((p.quasi_local - oracles::momentum_flux_refined(coarse.surface, *data, 48)).norm() < 1e-6);
  // the two conventions share the flux and the correction
  CHECK((p.pseudo_adm - (-p.quasi_local + p.correction)).norm() < 1e-15);
  CHECK((p.pseudo_direct - (p.quasi_local + p.correction)).norm() < 1e-15);
  CHECK((p.pseudo - p.pseudo_adm).norm() == 0.0);
  const auto direct = quasi_local_momentum(coarse.geometry, 16.0, *data, MomentumConvention::direct);
  CHECK((direct.pseudo - p.pseudo_direct).norm() == 0.0);

  // linear in kbar
  const auto p2 = quasi_local_momentum(coarse.geometry, 16.0, *synthetic(2.0));
  CHECK((p2.pseudo - 2.0 * p.pseudo).norm() < 1e-13 * p.pseudo.norm());
}

TEST_CASE("ADM center integral") {
  auto sch = schwarzschild(1.0);
  for (double r : {16.0, 64.0, 256.0}) CHECK(adm_center_integral(*sch, r).norm() < 1e-12);

  const Vec3 a(1, -2, 0.5);
  auto moved = translated(sch, a);
  const double e1 = (adm_center_integral(*moved, 256.0) - a).norm();
  const double e2 = (adm_center_integral(*moved, 1024.0) - a).norm();
  CHECK(e1 < 0.05);
  CHECK(e2 < e1);

  // odd model against midpoint quadrature with differenced metric derivatives
  auto odd = perturbed_schwarzschild(1.0, 0.5, 0.1, "odd");
  const Vec3 z = adm_center_integral(*odd, 64.0);
  CHECK(z.norm() > 1e-3);
  const double d1 = (z - oracles::adm_center_midpoint(*odd, 64.0, 48)).norm();
  const double d2 = (z - oracles::adm_center_midpoint(*odd, 64.0, 96)).norm();
  CHECK(d2 < 1e-4 * z.norm());
  // fourth-order differences plus midpoint quadrature
  CHECK(d1 > d2);

  CHECK(adm_center_from_leaf_formula(*sch, 32.0).norm() < 1e-12);
  CHECK((adm_center_from_leaf_formula(*moved, 1024.0) - a).norm() < 0.05);
  CHECK_THROWS_AS(adm_center_integral(*sch, 1.0), Error);
}

TEST_CASE("lapse right-hand side") {
  auto sch = schwarzschild(1.0);
  const Leaf leaf = solve_cmc(*sch, 16.0, config());
  const auto op = StabilityOperator::assemble(leaf.geometry);
  CHECK(sup(lapse_rhs(leaf.geometry, op, *time_symmetric_data(sch)).field.values()) == 0.0);
  CHECK(sup(lapse_rhs(leaf.geometry, op, *artificial_data(sch, 0.5)).field.values()) == 0.0);

  // against -dH/dt of the fixed surface under the evolved metric
  const auto data = synthetic();
  const auto rhs = lapse_rhs(leaf.geometry, op, *data);
  const Eigen::VectorXd fd = oracles::fd_lapse_rhs(leaf.surface, data, 1e-4);
  CHECK(sup(rhs.field.values() - fd) < 1e-6 * sup(fd));

  // decay of the rhs over dyadic sigma
  std::vector<double> s{16, 32, 64}, v;
  for (double sigma : s) {
    const Leaf l = solve_cmc(*sch, sigma, config());
    v.push_back(sup(lapse_rhs(l.geometry, StabilityOperator::assemble(l.geometry), *data).field.values()));
  }
  const auto fit = fit_power_law(s, v);
  CHECK(fit.exponent >= 2.0 + 1.0 - 0.2);
}

TEST_CASE("solve_lapse") {
  auto sch = schwarzschild(1.0);
  const Leaf leaf = solve_cmc(*sch, 16.0, config());
  const auto& geom = leaf.geometry;
  const auto op = StabilityOperator::assemble(geom);
  const ScalarField zero(geom.grid, Eigen::VectorXd::Zero(geom.size()));
  CHECK(sup(solve_lapse(geom, op, zero).values()) == 0.0);

  // L f1 = -lambda1 f1 for the eigenpair of -L
  const auto e = low_eigenpairs(geom, op, 1).front();
  const ScalarField rhs(geom.grid, -e.lambda * e.field.values());
  CHECK(sup(solve_lapse(geom, op, rhs).values() - e.field.values()) < 1e-8 * sup(e.field.values()));

  // growth of w over sigma
  const auto data = synthetic();
  std::vector<double> s{16, 32, 64}, v;
  for (double sigma : s) v.push_back(evolution_residual(solve_cmc(*sch, sigma, config()), *data).w_w1inf);
  CHECK(fit_power_law(s, v).exponent >= -(1.0 - 1.0 + 0.2));

  // the flat sphere has an exact kernel
  auto flat = euclidean();
  const Leaf round = solve_cmc(*flat, 10.0, config());
  const auto fop = StabilityOperator::assemble(round.geometry);
  const auto x1 = ScalarField::from_function(round.geometry.grid, [](const Vec3& d) { return d.x(); });
  CHECK_THROWS_AS(solve_lapse(round.geometry, fop, x1), Error);
}

TEST_CASE("center velocity from the lapse") {
  auto g = SphericalGrid::shared(16);
  const auto geom = compute_geometry(SurfaceEmbedding::round_sphere(g, Vec3::Zero(), 10.0), *euclidean());
  const ScalarField c(g, Eigen::VectorXd::Constant(g->size(), 2.0));
  CHECK(center_velocity_from_lapse(geom, c).norm() < 1e-14);
  const auto nu1 = ScalarField::from_function(g, [](const Vec3& d) { return d.x(); });
  CHECK((center_velocity_from_lapse(geom, nu1) - Vec3(1, 0, 0)).norm() < 1e-13);

  // deform the sphere by h w along the normal and measure its centroid
  SpectralCoeffs wc(g);
  wc(0, 0) = 1.0;
  wc(1, -1) = 0.4;
  wc(1, 0) = -0.3;
  wc(2, 2) = 0.5;
  const ScalarField w = synthesize(wc);
  const auto base = SurfaceEmbedding::round_sphere(g, Vec3::Zero(), 10.0);
  auto moved = [&](double h) {
    SpectralCoeffs rho = base.rho();
    rho.values() += h * wc.values();
    return euclidean_center(SurfaceEmbedding(Vec3::Zero(), rho));
  };
  const double h = 1e-3;
  const Vec3 fd = (moved(h) - moved(-h)) / (2 * h);
  CHECK((fd - center_velocity_from_lapse(geom, w, CenterMeasure::euclidean)).norm() < 1e-6);
  CHECK((fd - center_velocity_from_lapse(geom, w)).norm() < 1e-6);
}

TEST_CASE("evolution residual") {
  auto sch = schwarzschild(1.0);
  const Leaf leaf = solve_cmc(*sch, 16.0, config());
  const auto ts = evolution_residual(leaf, *time_symmetric_data(sch));
  CHECK(ts.residual <= 1e-8);
  CHECK(ts.velocity.norm() <= 1e-8);

  const auto one = evolution_residual(leaf, *synthetic(1.0));
  const auto two = evolution_residual(leaf, *synthetic(2.0));
  CHECK(one.velocity.norm() > 1e-3);
  CHECK((two.velocity - 2.0 * one.velocity).norm() <= 0.01 * 2.0 * one.velocity.norm());
  CHECK((two.prediction - 2.0 * one.prediction).norm() <= 0.01 * 2.0 * one.prediction.norm());
  CHECK((one.prediction - one.momentum.pseudo / sch->mass()).norm() < 1e-15);

  // the velocity is the motion of the leaf in the evolved metric
  const Vec3 fd = oracles::fd_leaf_velocity(synthetic(1.0), 16.0, 1e-3, config());
  CHECK((fd - one.velocity).norm() < 1e-5 * one.velocity.norm());

  std::vector<double> s{16, 32, 64, 128}, r;
  for (double sigma : s) r.push_back(evolution_residual(solve_cmc(*sch, sigma, config()), *synthetic()).residual);
  const auto fit = fit_power_law(s, r);
  CHECK(fit.exponent >= 1.0 - 0.3);
  CHECK(fit.residual < 0.1);
}

TEST_CASE("artificial flow") {
  const auto flat_path = artificial_flow_integrate(schwarzschild(1.0), 32.0, 10, 16);
  REQUIRE(flat_path.path.size() == 11);
  for (const auto& z : flat_path.path) CHECK(z.norm() < 1e-14);
  CHECK(flat_path.tau.back() == 1.0);

  auto odd = perturbed_schwarzschild(1.0, 0.5, 0.1, "odd");
  const auto a = artificial_flow_integrate(odd, 32.0, 20, 16);
  const auto b = artificial_flow_integrate(odd, 32.0, 40, 16);
  CHECK(a.endpoint.norm() > 1e-3);
  CHECK((a.endpoint - b.endpoint).norm() <= 1e-8);

  // the endpoint approximates the directly solved leaf center
  const Leaf leaf = solve_cmc(*odd, 32.0, config());
  const Vec3 direct = euclidean_center(leaf.surface);
  CHECK((a.endpoint - direct).norm() <= 0.05 * direct.norm());
}
