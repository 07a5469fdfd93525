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

#include "cmclab/cmc_solver.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <spdlog/spdlog.h>

#include "cmclab/errors.hpp"

namespace cmclab {

double target_mean_curvature(double sigma, double m) {
  if (!(sigma > 0.0)) fail(ErrorKind::domain, "sigma must be positive");
  return -2.0 / sigma + 4.0 * m / (sigma * sigma);
}

double schwarzschild_leaf_radius(double sigma, double m) {
  const double target = -target_mean_curvature(sigma, m);
  if (m == 0.0) return sigma;
  auto f = [m](double r) {
    const double phi = 1.0 + m / (2.0 * r);
    return (2.0 / r - 2.0 * m / (r * r * phi)) / (phi * phi);
  };
  double lo = std::max(sigma / 2.0, 2.0 * m), hi = 4.0 * sigma;
  if (!(f(lo) > target && f(hi) < target))
    fail(ErrorKind::solver, "no centered Schwarzschild leaf for sigma = " + std::to_string(sigma));
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd solve_weak(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double* rcond) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rc = lu.rcond();
  if (rcond) *rcond = rc;
  if (std::isfinite(rc) && rc >= 1e-12) return lu.solve(b);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(1e-10);
  cod.compute(A);
  return cod.solve(b);
}

namespace {

double h_residual(const SurfaceGeometry& geom, double H_target, double sigma) {
  return (geom.H.array() - H_target).abs().maxCoeff() * sigma * sigma;
}

struct StepResult {
  SurfaceEmbedding surface;
  double rcond = 0.0;
  double update = 0.0;
};

StepResult step_from(const SurfaceEmbedding& surface, const SurfaceGeometry& geom, double H_target) {
  const auto op = StabilityOperator::assemble(geom, false);
  const Eigen::VectorXd rhs = weak_rhs(geom, (H_target - geom.H.array()).matrix());
  StepResult out;
  const Eigen::VectorXd c = solve_weak(op.A, rhs, &out.rcond);
  const Eigen::VectorXd u = geom.grid->basis() * c;
  const ScalarField drho(geom.grid, u.cwiseQuotient(geom.n_dot_nu));
  const auto dc = analyze(drho);
  out.update = drho.values().cwiseAbs().maxCoeff();
  out.surface = SurfaceEmbedding(surface.center(), SpectralCoeffs(geom.grid, surface.rho().values() + dc.values()));
  return out;
}

}  // namespace

NewtonStep newton_step(const SurfaceEmbedding& surface, const MetricModel& model, double H_target, double sigma) {
  const auto geom = compute_geometry(surface, model);
  NewtonStep out;
  out.residual_before = h_residual(geom, H_target, sigma);
  auto s = step_from(surface, geom, H_target);
  out.surface = s.surface;
  out.rcond = s.rcond;
  out.update_norm = s.update;
  out.residual_after = h_residual(compute_geometry(out.surface, model), H_target, sigma);
  return out;
}

Leaf solve_cmc(const MetricModel& model, double sigma, const SolverConfig& config,
               const std::optional<SurfaceEmbedding>& initial) {
  const double m = model.mass();
  if (sigma < config.sigma_floor_factor * m)
    fail(ErrorKind::domain, "sigma = " + std::to_string(sigma) + " below floor " +
                                std::to_string(config.sigma_floor_factor * m));
  auto grid = SphericalGrid::shared(config.band_limit);
  SurfaceEmbedding surf;
  if (initial) {
    surf = SurfaceEmbedding(initial->center(), resample(initial->rho(), grid));
  } else {
    surf = SurfaceEmbedding::round_sphere(grid, model.origin(), schwarzschild_leaf_radius(sigma, m));
  }
  Leaf leaf;
  leaf.sigma = sigma;
  leaf.H_target = target_mean_curvature(sigma, m);

  int increases = 0;
  double prev = std::numeric_limits<double>::infinity();
  int it = 0;
  for (;; ++it) {
    SurfaceGeometry geom = compute_geometry(surf, model);
    const double res = h_residual(geom, leaf.H_target, sigma);
    leaf.diag.residual_history.push_back(res);
    spdlog::debug("sigma={} newton it={} residual={:.3e}", sigma, it, res);
    if (res <= config.newton_tol) {
      const Vec3 z = euclidean_center(geom);
      if ((z - surf.center()).norm() > config.recenter_threshold * sigma && leaf.diag.recenterings < 5) {
        spdlog::debug("sigma={} recentering to ({}, {}, {})", sigma, z.x(), z.y(), z.z());
        surf = surf.recentered(z);
        ++leaf.diag.recenterings;
        prev = std::numeric_limits<double>::infinity();
        increases = 0;
        continue;
      }
      leaf.geometry = std::move(geom);
      break;
    }
    if (res > prev) {
      if (++increases >= 3)
        fail(ErrorKind::divergence, "Newton diverged at sigma = " + std::to_string(sigma) +
                                        " (residual increased 3 times, now " + std::to_string(res) + ")");
    } else {
      increases = 0;
    }
    prev = res;
    if (it >= config.max_newton)
      fail(ErrorKind::divergence, "Newton did not converge within " + std::to_string(config.max_newton) +
                                      " iterations at sigma = " + std::to_string(sigma) + " (residual " +
                                      std::to_string(res) + ")");
    auto step = step_from(surf, geom, leaf.H_target);
    leaf.diag.rcond = step.rcond;
    surf = std::move(step.surface);
  }
  leaf.surface = surf;
  leaf.diag.iterations = it;
  leaf.diag.residual = leaf.diag.residual_history.back();
  leaf.diag.center = euclidean_center(leaf.geometry);
  leaf.diag.area_radius = std::sqrt(leaf.geometry.area / (4.0 * std::numbers::pi));
  leaf.diag.kring_sup = leaf.geometry.kring_norm.maxCoeff();
  if (config.eigen_count > 0) {
    for (const auto& e : low_eigenpairs(leaf.geometry, config.eigen_count)) leaf.diag.eigenvalues.push_back(e.lambda);
  }
  return leaf;
}

bool leaves_nested(const SurfaceEmbedding& inner, const SurfaceEmbedding& outer) {
  const auto& g = inner.grid();
  const ScalarField r_in = inner.rho_nodal();
  for (int n = 0; n < g->size(); ++n) {
    if (!(outer.radius_from(inner.center(), g->direction(n)) > r_in[n])) return false;
  }
  return true;
}

FoliationResult solve_foliation(const MetricModel& model, const std::vector<double>& sigmas,
                                const SolverConfig& config) {
  for (std::size_t i = 1; i < sigmas.size(); ++i)
    if (!(sigmas[i] > sigmas[i - 1])) fail(ErrorKind::configuration, "sigma schedule must be strictly increasing");
  FoliationResult out;
  std::optional<SurfaceEmbedding> guess;
  double prev_sigma = 0.0;
  for (double s : sigmas) {
    try {
      if (guess) guess = guess->scaled(s / prev_sigma);
      Leaf leaf = solve_cmc(model, s, config, guess);
      guess = leaf.surface;
      prev_sigma = s;
      if (!out.leaves.empty() && !leaves_nested(out.leaves.back().surface, leaf.surface)) out.nested = false;
      out.leaves.push_back(std::move(leaf));
    } catch (const Error& e) {
      out.complete = false;
      out.failure = e.what();
      out.failed_sigma = s;
      spdlog::warn("foliation stopped at sigma={}: {}", s, e.what());
      break;
    }
  }
  return out;
}

RadialLapse solve_radial_lapse(const Leaf& leaf, const MetricModel& model) {
  const auto& geom = leaf.geometry;
  const double s = leaf.sigma, m = model.mass();
  const auto op = StabilityOperator::assemble(geom, false);
  const double dH = 2.0 / (s * s) - 8.0 * m / (s * s * s);
  RadialLapse out;
  const Eigen::VectorXd c =
      solve_weak(op.A, weak_rhs(geom, Eigen::VectorXd::Constant(geom.size(), dH)), &out.rcond);
  if (out.rcond < 1e-14)
    spdlog::warn("radial lapse solve near singular (rcond {:.2e})", out.rcond);
  out.u = ScalarField(geom.grid, geom.grid->basis() * c);
  out.deviation_sup = (out.u.values().array() - (1.0 + m / s)).abs().maxCoeff();
  ScalarField dev(geom.grid, out.u.values().array() - 1.0);
  out.w1inf = sobolev_norm(geom, dev, 1, std::numeric_limits<double>::infinity(), s);
  return out;
}

}  // namespace cmclab
