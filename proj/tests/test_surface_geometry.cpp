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
#include <limits>
#include <numbers>

#include "doctest.h"
#include "approx.hpp"
#include "cmclab/cmc_solver.hpp"
#include "cmclab/oracles.hpp"
#include "cmclab/surface_geometry.hpp"

using namespace cmclab;
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

namespace {

double sup_dev(const Eigen::VectorXd& v, double c) { return (v.array() - c).abs().maxCoeff(); }

}  // namespace

TEST_CASE("mean curvature of round spheres") {
  auto g = SphericalGrid::shared(16);
  const auto flat = compute_geometry(SurfaceEmbedding::round_sphere(g, Vec3::Zero(), 10.0), *euclidean());
  CHECK(sup_dev(flat.H, -0.2) < 1e-13);
  CHECK(flat.area == approx(400 * kPi, 1e-13));
  // |kring| = sqrt(|k|^2 - H^2/2) loses half the digits to cancellation
  CHECK(flat.kring_norm.cwiseAbs().maxCoeff() < 1e-7);
  CHECK(flat.sigma == approx(10.0, 1e-13));

  // translation and scaling
  const auto moved = compute_geometry(SurfaceEmbedding::round_sphere(g, Vec3(1, -2, 3), 10.0), *euclidean());
  CHECK(sup_dev(moved.H, -0.2) < 1e-13);
  const auto big = compute_geometry(SurfaceEmbedding::round_sphere(g, Vec3::Zero(), 10.0).scaled(2.0), *euclidean());
  CHECK(sup_dev(big.H, -0.1) < 1e-13);

  auto sch = schwarzschild(1.0);
  const auto s = compute_geometry(SurfaceEmbedding::round_sphere(g, Vec3::Zero(), 10.0), *sch);
  CHECK(sup_dev(s.H, oracles::schwarzschild_sphere_H(10.0, 1.0)) < 1e-13);
  // nu is a unit normal for gbar, orthogonal to the tangent frame
  for (int n : {0, 100, 400}) {
    CHECK(s.nu.col(n).dot(s.gbar[n] * s.nu.col(n)) == approx(1.0, 1e-13));
    CHECK(std::abs(s.X1.col(n).dot(s.gbar[n] * s.nu.col(n))) < 1e-12);
    CHECK(std::abs(s.X2.col(n).dot(s.gbar[n] * s.nu.col(n))) < 1e-12);
  }
}

TEST_CASE("mean curvature radius") {
  CHECK(mean_curvature_radius(-0.2, 0.0) == approx(10.0));
  CHECK(mean_curvature_radius(target_mean_curvature(16.0, 1.0), 1.0) == approx(16.0, 1e-13));
}

TEST_CASE("surface embedding") {
  auto g = SphericalGrid::shared(12);
  SpectralCoeffs rho(g);
  rho(0, 0) = 10.0 * std::sqrt(4 * kPi);
  rho(2, 1) = 0.3;
  const SurfaceEmbedding s(Vec3(0.5, 0, 0), rho);
  const auto back = SurfaceEmbedding::from_json(s.to_json());
  CHECK((back.rho().values() - rho.values()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.center() - s.center()).norm() == 0.0);
  // re-expressing about a nearby center reproduces the same points
  const auto r = s.recentered(Vec3(0, 0.2, 0));
  const Vec3 n = Vec3(1, 1, 1).normalized();
  const Vec3 p = r.center() + r.radius_from(r.center(), n) * n;
  CHECK(std::abs(s.radius_from(s.center(), (p - s.center()).normalized()) - (p - s.center()).norm()) < 1e-9);
}

TEST_CASE("stability operator apply") {
  auto g = SphericalGrid::shared(16);
  const auto flat = compute_geometry(SurfaceEmbedding::round_sphere(g, Vec3::Zero(), 10.0), *euclidean());
  // constants: L 1 = |k|^2 = 2/r^2
  const auto one = stability_operator_apply(flat, ScalarField(g, Eigen::VectorXd::Ones(g->size())));
  CHECK(sup_dev(one.Lf.values(), 0.02) < 1e-12);
  CHECK_FALSE(one.resolution_warning);
  // degree-1 functions are Jacobi fields of translations
  const auto x1 = ScalarField::from_function(g, [](const Vec3& d) { return d.x(); });
  CHECK(stability_operator_apply(flat, x1).Lf.values().cwiseAbs().maxCoeff() < 1e-12);

  // Schwarzschild: degree-1 Rayleigh quotient of -L is about 6m/sigma^3
  auto sch = schwarzschild(1.0);
  SolverConfig cfg;
  cfg.band_limit = 16;
  cfg.eigen_count = 0;
  const Leaf leaf = solve_cmc(*sch, 32.0, cfg);
  const auto z = ScalarField::from_function(g, [](const Vec3& d) { return d.z(); });
  const auto r = stability_operator_apply(leaf.geometry, z);
  const double q = -leaf.geometry.integrate(r.Lf.values().cwiseProduct(z.values())) /
                   leaf.geometry.integrate(z.values().cwiseAbs2());
  CHECK(q == approx(6.0 / std::pow(32.0, 3), 0.15));
}

TEST_CASE("eigenvalues") {
  auto g = SphericalGrid::shared(16);
  const auto flat = compute_geometry(SurfaceEmbedding::round_sphere(g, Vec3::Zero(), 10.0), *euclidean());
  const auto e = low_eigenpairs(flat, 3);
  REQUIRE(e.size() == 3);
  for (const auto& p : e) {
    CHECK(std::abs(p.lambda) < 1e-12);
    CHECK(p.degree1_fraction > 0.999);
  }

  auto sch = schwarzschild(1.0);
  SolverConfig cfg;
  cfg.band_limit = 16;
  cfg.eigen_count = 0;
  const Leaf leaf = solve_cmc(*sch, 32.0, cfg);
  const auto s = low_eigenpairs(leaf.geometry, 3);
  const double expected = 6.0 / std::pow(32.0, 3);
  for (const auto& p : s) {
    CHECK(p.lambda == approx(expected, 0.1));
    CHECK(p.degree1_fraction >= 0.95);
    CHECK(leaf.geometry.integrate(p.field.values().cwiseAbs2()) == approx(1.0, 1e-10));
  }
}

TEST_CASE("sobolev norms") {
  auto g = SphericalGrid::shared(16);
  const double s = 10.0;
  const auto geom = compute_geometry(SurfaceEmbedding::round_sphere(g, Vec3::Zero(), s), *euclidean());
  const ScalarField one(g, Eigen::VectorXd::Ones(g->size()));
  CHECK(sobolev_norm(geom, one, 0, 2) == approx(std::sqrt(4 * kPi) * s, 1e-13));
  CHECK(sobolev_norm(geom, one, 2, 2) == approx(std::sqrt(4 * kPi) * s, 1e-12));
  CHECK(sobolev_norm(geom, one, 1, kInf) == approx(1.0, 1e-12));
  const auto nu1 = ScalarField::from_function(g, [](const Vec3& d) { return d.x(); });
  CHECK(sobolev_norm(geom, nu1, 0, 2) == approx(std::sqrt(4 * kPi / 3) * s, 1e-13));
  // |grad nu1|^2 = (1 - nu1^2)/s^2, integral 8 pi / 3
  CHECK(sobolev_norm(geom, nu1, 1, 2) ==
        approx(std::sqrt(4 * kPi / 3) * s + s * std::sqrt(8 * kPi / 3), 1e-12));
  CHECK_THROWS(sobolev_norm(geom, one, 3, 2));

  SolverConfig cfg;
  cfg.band_limit = 16;
  cfg.eigen_count = 0;
  const Leaf leaf = solve_cmc(*perturbed_schwarzschild(1.0, 0.5, 0.1, "odd"), 16.0, cfg);
  CHECK(kring_lp_norm(leaf.geometry, kInf) <= 10.0 / (16.0 * 16.0));
}

TEST_CASE("euclidean centers") {
  auto g = SphericalGrid::shared(16);
  const auto ball = SurfaceEmbedding::round_sphere(g, Vec3(5, 0, 0), 10.0);
  CHECK((euclidean_center(ball) - Vec3(5, 0, 0)).norm() < 1e-12);
  const auto geom = compute_geometry(ball, *euclidean());
  CHECK((euclidean_center(geom) - Vec3(5, 0, 0)).norm() < 1e-12);
  CHECK((euclidean_center(geom, CenterMeasure::induced) - Vec3(5, 0, 0)).norm() < 1e-12);

  // a lopsided graph against plain midpoint quadrature
  SpectralCoeffs rho(g);
  rho(0, 0) = 10.0 * std::sqrt(4 * kPi);
  rho(1, 1) = 0.8;
  rho(2, -1) = 0.4;
  rho(3, 0) = -0.3;
  const SurfaceEmbedding s(Vec3(0, 1, 0), rho);
  // the midpoint rule converges at second order
  const Vec3 c = euclidean_center(s);
  const double e1 = (c - oracles::euclidean_center_midpoint(s, 256)).norm();
  const double e2 = (c - oracles::euclidean_center_midpoint(s, 512)).norm();
  CHECK(e1 < 1e-5);
  CHECK(e1 / e2 == approx(4.0, 0.05));
  CHECK((euclidean_center(compute_geometry(s, *euclidean())) - c).norm() < 1e-13);
}
