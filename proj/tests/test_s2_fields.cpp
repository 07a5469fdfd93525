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
#include <random>

#include "doctest.h"
#include "approx.hpp"
#include "cmclab/errors.hpp"
#include "cmclab/fits.hpp"
#include "cmclab/s2_fields.hpp"

using namespace cmclab;
constexpr double kPi = std::numbers::pi;

namespace {

ScalarField harmonic(const GridPtr& g, int l, int m) {
  SpectralCoeffs c(g);
  c(l, m) = 1.0;
  return synthesize(c);
}

}  // namespace

TEST_CASE("grid sizes and weights") {
  auto g4 = SphericalGrid::shared(4);
  CHECK(g4->size() == 50);
  CHECK(g4->weights().sum() == approx(4 * kPi, 1e-14));
  CHECK(SphericalGrid::shared(32)->size() == 2178);
  CHECK_THROWS_AS(SphericalGrid(3), Error);
}

TEST_CASE("quadrature is exact up to degree 2L") {
  auto g = SphericalGrid::shared(8);
  for (int l = 1; l <= 8; ++l)
    for (int m = -l; m <= l; ++m) CHECK(std::abs(integrate(harmonic(g, l, m))) < 1e-13);
  // products of two degree-L harmonics reach degree 2L
  const auto a = harmonic(g, 8, 3), b = harmonic(g, 8, 3), c = harmonic(g, 8, -5);
  CHECK(g->weights().dot(a.values().cwiseProduct(b.values())) == approx(1.0, 1e-13));
  CHECK(std::abs(g->weights().dot(a.values().cwiseProduct(c.values()))) < 1e-13);
}

TEST_CASE("analyze and synthesize") {
  auto g = SphericalGrid::shared(16);
  const auto c21 = analyze(harmonic(g, 2, 1));
  for (int i = 0; i < g->num_coeffs(); ++i)
    CHECK(std::abs(c21.values()[i] - (i == SphericalGrid::index(2, 1) ? 1.0 : 0.0)) < 1e-13);

  const auto one = analyze(ScalarField(g, Eigen::VectorXd::Ones(g->size())));
  CHECK(one(0, 0) == approx(std::sqrt(4 * kPi), 1e-14));

  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  SpectralCoeffs c(g);
  for (int i = 0; i < g->num_coeffs(); ++i) c.values()[i] = n(rng);
  CHECK((analyze(synthesize(c)).values() - c.values()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("degree-1 harmonics are positive multiples of x, y, z") {
  auto g = SphericalGrid::shared(6);
  const double k = std::sqrt(3.0 / (4 * kPi));
  const Vec3 d = g->direction(17);
  CHECK(harmonic(g, 1, 1)[17] == approx(k * d.x()));
  CHECK(harmonic(g, 1, -1)[17] == approx(k * d.y()));
  CHECK(harmonic(g, 1, 0)[17] == approx(k * d.z()));
}

TEST_CASE("integrate") {
  auto g = SphericalGrid::shared(12);
  CHECK(integrate(ScalarField(g, Eigen::VectorXd::Ones(g->size()))) == approx(4 * kPi, 1e-14));
  const auto nu1sq = ScalarField::from_function(g, [](const Vec3& d) { return d.x() * d.x(); });
  CHECK(integrate(nu1sq) == approx(4 * kPi / 3, 1e-14));
  CHECK(std::abs(integrate(harmonic(g, 3, 2))) < 1e-13);
  const auto w = ScalarField::from_function(g, [](const Vec3& d) { return 2.0 + d.z(); });
  const auto f = ScalarField::from_function(g, [](const Vec3& d) { return d.z(); });
  CHECK(integrate(f, &w) == approx(4 * kPi / 3, 1e-14));
}

TEST_CASE("evaluate matches nodal values") {
  auto g = SphericalGrid::shared(10);
  const auto f = ScalarField::from_function(g, [](const Vec3& d) { return d.x() * d.y() * d.z() + d.x(); });
  const auto c = analyze(f);
  for (int n : {0, 33, 100, g->size() - 1}) CHECK(evaluate(c, g->direction(n)) == approx(f[n], 1e-13));
  const Vec3 p = Vec3(0.3, -0.5, 0.8).normalized();
  CHECK(evaluate(c, p) == approx(p.x() * p.y() * p.z() + p.x(), 1e-13));
}

TEST_CASE("derivatives against finite differences") {
  auto g = SphericalGrid::shared(12);
  SpectralCoeffs c(g);
  c(3, 2) = 1.0;
  c(5, -1) = 0.5;
  c(2, 0) = -0.7;
  const auto d = synthesize_derivatives(c);
  const int node = 5 * g->num_longitudes() + 7;
  const int ring = g->ring_of(node);
  const double t = g->colatitude(ring), p = g->longitude(node % g->num_longitudes());
  auto at = [&](double tt, double pp) {
    return evaluate(c, Vec3(std::sin(tt) * std::cos(pp), std::sin(tt) * std::sin(pp), std::cos(tt)));
  };
  const double h = 1e-4;
  CHECK(d.f_t[node] == approx((at(t + h, p) - at(t - h, p)) / (2 * h), 1e-7));
  CHECK(d.f_p[node] == approx((at(t, p + h) - at(t, p - h)) / (2 * h), 1e-7));
  CHECK(d.f_tt[node] == approx((at(t + h, p) - 2 * at(t, p) + at(t - h, p)) / (h * h), 1e-5));
  CHECK(d.f_pp[node] == approx((at(t, p + h) - 2 * at(t, p) + at(t, p - h)) / (h * h), 1e-5));
  CHECK(d.f_tp[node] == approx((at(t + h, p + h) - at(t + h, p - h) - at(t - h, p + h) + at(t - h, p - h)) /
                                        (4 * h * h))
                            .epsilon(1e-5));
}

TEST_CASE("sphere laplacian and gradient") {
  auto g = SphericalGrid::shared(8);
  const auto y10 = analyze(harmonic(g, 1, 0));
  CHECK(sphere_laplacian(y10)(1, 0) == approx(-2.0));
  for (int m = -2; m <= 2; ++m) CHECK(sphere_laplacian(analyze(harmonic(g, 2, m)))(2, m) == approx(-6.0));
  const auto lc = sphere_laplacian(analyze(ScalarField(g, Eigen::VectorXd::Constant(g->size(), 3.0))));
  CHECK(lc.values().cwiseAbs().maxCoeff() < 1e-12);
  // grad of z on the unit sphere is e_z - (e_z . N) N
  const auto z = ScalarField::from_function(g, [](const Vec3& d) { return d.z(); });
  const auto grad = tangential_gradient(z);
  for (int n : {3, 40, 120}) {
    const Vec3 N = g->direction(n);
    CHECK((grad.col(n) - (Vec3::UnitZ() - N.z() * N)).norm() < 1e-12);
  }
}

TEST_CASE("project_low_modes") {
  auto g = SphericalGrid::shared(8);
  auto lm = project_low_modes(ScalarField::from_function(g, [](const Vec3& d) { return 5.0 + d.z(); }));
  CHECK(lm.mean == approx(5.0));
  CHECK((lm.dipole - Vec3(0, 0, 1)).norm() < 1e-13);
  lm = project_low_modes(harmonic(g, 2, 0));
  CHECK(std::abs(lm.mean) < 1e-13);
  CHECK(lm.dipole.norm() < 1e-13);
  lm = project_low_modes(ScalarField::from_function(g, [](const Vec3& d) { return d.x() + 2 * d.y(); }));
  CHECK(std::abs(lm.mean) < 1e-13);
  CHECK((lm.dipole - Vec3(1, 2, 0)).norm() < 1e-13);
}

TEST_CASE("resample and grid checks") {
  auto g8 = SphericalGrid::shared(8), g16 = SphericalGrid::shared(16);
  SpectralCoeffs c(g8);
  c(4, -3) = 2.0;
  const auto up = resample(c, g16);
  CHECK(up(4, -3) == 2.0);
  CHECK(resample(up, g8).values() == c.values());
  CHECK_THROWS_AS(require_same_grid(g8, g16), Error);
  CHECK(spectral_tail_fraction(up, 4) == approx(1.0));
  CHECK(degree_energy_fraction(up, 3) == 0.0);
}

TEST_CASE("power-law fit and Richardson limit") {
  std::vector<double> x{16, 32, 64, 128}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -1.5));
  const auto fit = fit_power_law(x, y);
  CHECK(fit.ok);
  CHECK(fit.exponent == approx(1.5));
  CHECK(fit.prefactor == approx(3.0));
  CHECK(fit.residual < 1e-12);
  std::vector<double> z;
  for (double v : x) z.push_back(2.0 + 1.0 / v - 4.0 / (v * v));
  CHECK(richardson_limit(x, z) == approx(2.0, 1e-12));
}
