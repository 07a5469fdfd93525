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
#include "cmclab/cmc_solver.hpp"
#include "cmclab/errors.hpp"
#include "cmclab/oracles.hpp"

using namespace cmclab;
constexpr double kPi = std::numbers::pi;

namespace {

SolverConfig config(int L = 16) {
  SolverConfig c;
  c.band_limit = L;
  c.eigen_count = 0;
  return c;
}

double sup_dev(const Eigen::VectorXd& v, double c) { return (v.array() - c).abs().maxCoeff(); }

double radial_spread(const SurfaceEmbedding& s) {
  const auto r = s.rho_nodal().values();
  return r.maxCoeff() - r.minCoeff();
}

}  // namespace

TEST_CASE("target mean curvature") {
  CHECK(target_mean_curvature(10.0, 1.0) == approx(-0.16, 1e-15));
  CHECK(target_mean_curvature(1e8, 1.0) < 0.0);
  CHECK(target_mean_curvature(1e8, 1.0) > -3e-8);
  CHECK(target_mean_curvature(4.0, 1.0) == approx(-0.25, 1e-15));
  CHECK(target_mean_curvature(10.0, 0.0) == approx(-0.2, 1e-15));
}

TEST_CASE("schwarzschild leaf radius against bisection oracle") {
  CHECK(oracles::schwarzschild_radius(10.0, 1.0) == approx(10.320569288478936, 1e-14));
  for (double s : {8.0, 10.0, 16.0, 32.0, 100.0})
    CHECK(schwarzschild_leaf_radius(s, 1.0) == approx(oracles::schwarzschild_radius(s, 1.0), 1e-13));
  CHECK(schwarzschild_leaf_radius(10.0, 0.0) == approx(10.0, 1e-14));
}

TEST_CASE("newton step") {
  auto g = SphericalGrid::shared(16);
  auto flat = euclidean();
  // already a solution: the step is (numerically) zero
  const auto exact = newton_step(SurfaceEmbedding::round_sphere(g, Vec3::Zero(), 10.0), *flat, -0.2, 10.0);
  CHECK(exact.residual_before < 1e-12);
  CHECK(exact.update_norm < 1e-10);

  // a perturbed Euclidean sphere converges quadratically
  SpectralCoeffs rho(g);
  rho(0, 0) = 10.0 * std::sqrt(4 * kPi);
  rho(2, 0) = 0.05;
  rho(3, -2) = 0.03;
  SurfaceEmbedding s(Vec3::Zero(), rho);
  auto step = newton_step(s, *flat, -0.2, 10.0);
  CHECK(step.residual_before > 1e-3);
  CHECK(step.residual_after < 0.02 * step.residual_before);
  const double first = step.residual_after;
  step = newton_step(step.surface, *flat, -0.2, 10.0);
  CHECK(step.residual_after < 1e-6);
  CHECK(step.residual_after < 50 * first * first);

  // Schwarzschild from the Euclidean radius sigma
  auto sch = schwarzschild(1.0);
  SurfaceEmbedding t = SurfaceEmbedding::round_sphere(g, Vec3::Zero(), 10.0);
  for (int i = 0; i < 6; ++i) t = newton_step(t, *sch, -0.16, 10.0).surface;
  CHECK(sup_dev(t.rho_nodal().values(), 10.320569288478936) < 1e-10);
}

TEST_CASE("solve_cmc") {
  auto sch = schwarzschild(1.0);
  const Leaf leaf = solve_cmc(*sch, 10.0, config());
  CHECK(leaf.H_target == approx(-0.16, 1e-15));
  CHECK(leaf.diag.residual <= 1e-10);
  CHECK(leaf.diag.center.norm() < 1e-10);
  CHECK(radial_spread(leaf.surface) < 1e-10);
  CHECK(leaf.surface.rho_nodal().values().mean() == approx(10.320569288478936, 1e-11));
  CHECK(leaf.diag.residual_history.size() == static_cast<size_t>(leaf.diag.iterations) + 1);

  // a translated model has the translated leaf
  const Leaf moved = solve_cmc(*translated(sch, {5, 0, 0}), 10.0, config());
  CHECK((moved.diag.center - Vec3(5, 0, 0)).norm() < 1e-8);

  // the odd model: the center stays within the expected growth
  const Leaf odd = solve_cmc(*perturbed_schwarzschild(1.0, 0.5, 0.1, "odd"), 16.0, config());
  CHECK(odd.diag.residual <= 1e-10);
  CHECK(odd.diag.center.norm() <= 5.0 * std::sqrt(16.0));
  CHECK(odd.diag.center.norm() > 1e-6);
  // and the eigen diagnostic when requested
  SolverConfig with_eigen = config();
  with_eigen.eigen_count = 3;
  const Leaf e = solve_cmc(*sch, 32.0, with_eigen);
  REQUIRE(e.diag.eigenvalues.size() == 3);
  for (double l : e.diag.eigenvalues) CHECK(l == approx(6.0 / std::pow(32.0, 3), 0.1));

  CHECK_THROWS_AS(solve_cmc(*sch, 4.0, config()), Error);
}

TEST_CASE("foliation") {
  auto model = perturbed_schwarzschild(1.0, 0.5, 0.1, "odd");
  const auto f = solve_foliation(*model, {12, 16, 24, 32}, config());
  REQUIRE(f.complete);
  REQUIRE(f.leaves.size() == 4);
  CHECK(f.nested);
  for (size_t i = 1; i < f.leaves.size(); ++i) {
    CHECK(f.leaves[i].diag.area_radius > f.leaves[i - 1].diag.area_radius);
    CHECK(leaves_nested(f.leaves[i - 1].surface, f.leaves[i].surface));
  }
  CHECK_FALSE(leaves_nested(f.leaves[2].surface, f.leaves[1].surface));

  const auto empty = solve_foliation(*model, {}, config());
  CHECK(empty.leaves.empty());
  CHECK(empty.complete);

  // a sigma below the floor stops the foliation
  const auto partial = solve_foliation(*model, {4, 16}, config());
  CHECK_FALSE(partial.complete);
  CHECK(partial.leaves.empty());
  CHECK(partial.failed_sigma == 4.0);
  CHECK_FALSE(partial.failure.empty());
  CHECK_THROWS_AS(solve_foliation(*model, {16, 12}, config()), Error);
}

TEST_CASE("radial lapse") {
  auto sch = schwarzschild(1.0);
  const Leaf leaf = solve_cmc(*sch, 16.0, config());
  const auto u = solve_radial_lapse(leaf, *sch);
  CHECK(u.deviation_sup <= 0.1);
  CHECK(u.rcond > 0.0);

  // the mass-free limit
  auto light = schwarzschild(1e-6);
  const Leaf l2 = solve_cmc(*light, 16.0, config());
  const auto u2 = solve_radial_lapse(l2, *light);
  CHECK(sup_dev(u2.u.values(), 1.0) < 1e-5);

  // u is the normal speed of the leaves: compare with a difference of radii
  // d r / d sigma along the radial direction, scaled by <N, nu> = 1 here
  const double h = 1e-3;
  const double dr = (oracles::schwarzschild_radius(16.0 + h, 1.0) - oracles::schwarzschild_radius(16.0 - h, 1.0)) / (2 * h);
  // normal speed measured in gbar: sqrt(g_rr) dr/dsigma
  const double phi2 = std::pow(1.0 + 0.5 / leaf.surface.rho_nodal().values().mean(), 2);
  CHECK(u.u.values().mean() == approx(phi2 * dr, 1e-6));
}
