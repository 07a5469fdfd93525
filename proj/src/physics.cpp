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

#include "cmclab/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <spdlog/spdlog.h>

#include "cmclab/errors.hpp"

namespace cmclab {

namespace {
constexpr double kPi = std::numbers::pi;
}

MomentumReport quasi_local_momentum(const SurfaceGeometry& geom, double sigma, const InitialDataModel& data,
                                    MomentumConvention convention) {
  MomentumReport rep;
  rep.sigma = sigma;
  const int N = geom.size();
  if (data.time_symmetric()) return rep;
  Eigen::Matrix3Xd flux(3, N), corr(3, N);
  Eigen::VectorXd fsup(N), csup(N);
#pragma omp parallel for schedule(static)
  for (int n = 0; n < N; ++n) {
    const Vec3 x = geom.x.col(n);
    const Vec3 nu = geom.nu.col(n);
    const KbarSample k = data.kbar(x);
    const Mat3& g = geom.gbar[n];
    const double Hbar = (g.inverse() * k.k).trace();
    const Mat3 Pi = Hbar * g - k.k;
    const Vec3 f = Pi * nu;  // Pi(nu, e_i)
    const Vec3 J = momentum_density(data, x);
    const double Jn = J.dot(nu);
    flux.col(n) = f;
    corr.col(n) = sigma * Jn * nu;
    fsup[n] = f.norm();
    csup[n] = std::abs(sigma * Jn);
  }
  rep.quasi_local = flux * geom.dmu / (8.0 * kPi);
  rep.correction = corr * geom.dmu / (8.0 * kPi);
  rep.pseudo_direct = rep.quasi_local + rep.correction;
  rep.pseudo_adm = -rep.quasi_local + rep.correction;
  rep.pseudo = convention == MomentumConvention::adm ? rep.pseudo_adm : rep.pseudo_direct;
  rep.flux_sup = fsup.maxCoeff();
  rep.correction_sup = csup.maxCoeff();
  return rep;
}

LapseRhs lapse_rhs(const SurfaceGeometry& geom, const StabilityOperator& op, const InitialDataModel& data) {
  const int N = geom.size();
  LapseRhs out;
  if (data.time_symmetric()) {
    out.coeffs = Eigen::VectorXd::Zero(geom.grid->num_coeffs());
    out.field = ScalarField(geom.grid);
    return out;
  }
  // Weak form: the surface divergence of kbar_nu is integrated by parts
  // onto the test function, leaving a single kbar_nu(grad alpha) term.
  Eigen::VectorXd s(N), t1(N), t2(N);
#pragma omp parallel for schedule(static)
  for (int n = 0; n < N; ++n) {
    const Vec3 x = geom.x.col(n);
    const Vec3 nu = geom.nu.col(n);
    const Mat3& g = geom.gbar[n];
    const KbarSample k = data.kbar(x);
    const Jet a = data.lapse(x);
    const Vec3 J = momentum_density(data, x);
    const Eigen::Matrix2d Gi = geom.G_inv(n);
    Eigen::Matrix<double, 3, 2> X;
    X.col(0) = geom.X1.col(n);
    X.col(1) = geom.X2.col(n);
    const Eigen::Matrix2d kb = X.transpose() * k.k * X;  // kbar restricted to the leaf
    Eigen::Matrix2d kk;
    kk << geom.k11[n], geom.k12[n], geom.k12[n], geom.k22[n];
    const double k_dot_kbar = (Gi * kk * Gi * kb).trace();
    const double tr_kb = (Gi * kb).trace();
    const double Dnu_a = a.d.dot(nu);
    const Vec3 knu = k.k * nu;
    const double kbar_nu_grad_a = knu.dot(g.inverse() * a.d) - Dnu_a * knu.dot(nu);
    s[n] = a.v * (-J.dot(nu) - k_dot_kbar) - Dnu_a * tr_kb + kbar_nu_grad_a;
    const Eigen::Vector2d q = X.transpose() * knu;
    const Eigen::Vector2d t = Gi * q;
    t1[n] = a.v * t[0];
    t2[n] = a.v * t[1];
  }
  const auto& grid = *geom.grid;
  const Eigen::VectorXd b = grid.basis().transpose() * geom.dmu.cwiseProduct(s) -
                            grid.basis_dtheta().transpose() * geom.dmu.cwiseProduct(t1) -
                            grid.basis_dphi().transpose() * geom.dmu.cwiseProduct(t2);
  out.coeffs = op.M.llt().solve(b);
  out.field = ScalarField(geom.grid, grid.basis() * out.coeffs);
  return out;
}

ScalarField solve_lapse(const SurfaceGeometry& geom, const StabilityOperator& op, const Eigen::VectorXd& rhs_coeffs) {
  const Eigen::VectorXd b = op.M * rhs_coeffs;
  if (b.norm() == 0.0) return ScalarField(geom.grid);
  double rc = 0.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(op.A);
  rc = lu.rcond();
  if (!(std::isfinite(rc) && rc >= 1e-12)) {
    // Near-exact kernel: the rhs must be orthogonal to it.
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(-op.A, op.M);
    const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      if (std::abs(es.eigenvalues()[i]) <= 1e-10 * scale) {
        const double proj = std::abs(es.eigenvectors().col(i).dot(b));
        if (proj > 1e-8 * b.norm())
          fail(ErrorKind::solvability, "lapse equation not solvable: rhs has a component along the kernel of L");
      }
    }
  }
  const Eigen::VectorXd c = solve_weak(op.A, b);
  return ScalarField(geom.grid, geom.grid->basis() * c);
}

ScalarField solve_lapse(const SurfaceGeometry& geom, const StabilityOperator& op, const ScalarField& rhs) {
  require_same_grid(geom.grid, rhs.grid());
  return solve_lapse(geom, op, project(geom, op, rhs.values()));
}

Vec3 center_velocity_from_lapse(const SurfaceGeometry& geom, const ScalarField& w, CenterMeasure measure) {
  require_same_grid(geom.grid, w.grid());
  const Eigen::VectorXd& dm = measure == CenterMeasure::induced ? geom.dmu : geom.dH2;
  const Eigen::VectorXd ww = dm.cwiseProduct(w.values());
  return 3.0 * (geom.nu * ww) / dm.sum();
}

EvolutionReport evolution_residual(const Leaf& leaf, const InitialDataModel& data, MomentumConvention convention,
                                   CenterMeasure measure) {
  const auto& geom = leaf.geometry;
  const double m = data.base().mass();
  if (!(m > 0.0)) fail(ErrorKind::model, "evolution residual needs a positive mass");
  EvolutionReport rep;
  rep.sigma = leaf.sigma;
  rep.momentum = quasi_local_momentum(geom, leaf.sigma, data, convention);
  const auto op = StabilityOperator::assemble(geom);
  const auto rhs = lapse_rhs(geom, op, data);
  rep.rhs_sup = rhs.field.values().cwiseAbs().maxCoeff();
  rep.w = solve_lapse(geom, op, rhs.coeffs);
  rep.velocity = center_velocity_from_lapse(geom, rep.w, measure);
  rep.prediction = rep.momentum.pseudo / m;
  rep.residual = (rep.velocity - rep.prediction).norm();
  rep.residual_direct = (rep.velocity - rep.momentum.pseudo_direct / m).norm();
  rep.w_w1inf = sobolev_norm(geom, rep.w, 1, std::numeric_limits<double>::infinity(), leaf.sigma);
  rep.w_l2 = sobolev_norm(geom, rep.w, 0, 2.0, leaf.sigma);
  return rep;
}

Vec3 adm_center_integral(const MetricModel& model, double rho, int band_limit) {
  const double m = model.mass();
  if (!(m > 0.0)) fail(ErrorKind::model, "ADM center needs a positive mass");
  auto grid = SphericalGrid::shared(band_limit);
  const int N = grid->size();
  Eigen::Matrix3Xd vals(3, N);
  for (int q = 0; q < N; ++q) {
    if (!model.in_domain(rho * grid->direction(q))) model.evaluate(rho * grid->direction(q), 0);
  }
#pragma omp parallel for schedule(static)
  for (int q = 0; q < N; ++q) {
    const Vec3 n = grid->direction(q);
    const Vec3 x = rho * n;
    const MetricSample s = model.evaluate(x, 1);
    // sum_j (d_j g_jk - d_k g_jj) n^k
    double flux = 0.0;
    for (int k = 0; k < 3; ++k) {
      double v = 0.0;
      for (int j = 0; j < 3; ++j) v += s.dg[j](j, k) - s.dg[k](j, j);
      flux += v * n[k];
    }
    // the flat part -2n integrates to zero; dropping it avoids O(rho^2) cancellation
    const Mat3 h = s.g - Mat3::Identity();
    vals.col(q) = x * flux - (h * n - h.trace() * n);
  }
  const Eigen::VectorXd w = grid->weights() * (rho * rho);
  return (vals * w) / (16.0 * kPi * m);
}

namespace {

Vec3 artificial_velocity(const MetricPtr& model, double sigma, double tau, const Vec3& z, const GridPtr& grid,
                         double kbar_scale, MomentumConvention convention) {
  const auto data = artificial_data(model, tau, kbar_scale);
  const auto sphere = SurfaceEmbedding::round_sphere(grid, z, sigma);
  const auto geom = compute_geometry(sphere, data->base());
  return quasi_local_momentum(geom, sigma, *data, convention).pseudo / model->mass();
}

}  // namespace

ArtificialFlowResult artificial_flow_integrate(const MetricPtr& model, double sigma, int steps, int band_limit,
                                               double kbar_scale, MomentumConvention convention) {
  if (steps < 1) fail(ErrorKind::configuration, "tau_steps must be >= 1");
  if (!(model->mass() > 0.0)) fail(ErrorKind::model, "artificial flow needs a positive mass");
  if (sigma < 8.0 * model->mass()) fail(ErrorKind::domain, "sigma below floor for the artificial flow");
  auto grid = SphericalGrid::shared(band_limit);
  ArtificialFlowResult out;
  out.sigma = sigma;
  Vec3 z = model->origin();
  const double h = 1.0 / steps;
  out.tau.push_back(0.0);
  out.path.push_back(z);
  auto f = [&](double t, const Vec3& y) {
    return artificial_velocity(model, sigma, t, y, grid, kbar_scale, convention);
  };
  for (int i = 0; i < steps; ++i) {
    const double t = i * h;
    const Vec3 k1 = f(t, z);
    const Vec3 k2 = f(t + 0.5 * h, z + 0.5 * h * k1);
    const Vec3 k3 = f(t + 0.5 * h, z + 0.5 * h * k2);
    const Vec3 k4 = f(t + h, z + h * k3);
    z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.tau.push_back((i + 1) * h);
    out.path.push_back(z);
  }
  out.endpoint = z;
  return out;
}

CenterReport center_report(const MetricModel& model, const std::vector<double>& sigmas,
                           const std::vector<double>& radii, const SolverConfig& config) {
  CenterReport rep;
  rep.sigmas = sigmas;
  rep.radii = radii;
  SolverConfig cfg = config;
  cfg.eigen_count = 0;
  const auto fol = solve_foliation(model, sigmas, cfg);
  if (!fol.complete) fail(ErrorKind::solver, "center report: " + fol.failure);
  std::vector<double> gaps, norms;
  for (const auto& leaf : fol.leaves) {
    rep.cmc_centers.push_back(leaf.diag.center);
    rep.leaf_formula.push_back(adm_center_from_leaf_formula(model, leaf.sigma, config.band_limit));
    gaps.push_back((rep.cmc_centers.back() - rep.leaf_formula.back()).norm());
    norms.push_back(leaf.diag.center.norm());
  }
  rep.gap_fit = fit_power_law(sigmas, gaps);
  rep.growth_fit = fit_power_law(sigmas, norms);

  for (double r : radii) rep.adm_integrals.push_back(adm_center_integral(model, r, config.band_limit));
  std::vector<double> rr, inc;
  for (std::size_t i = 1; i < radii.size(); ++i) {
    rr.push_back(radii[i]);
    inc.push_back((rep.adm_integrals[i] - rep.adm_integrals[i - 1]).norm());
  }
  rep.adm_increment_fit = fit_power_law(rr, inc);
  const double max_inc = inc.empty() ? 0.0 : *std::max_element(inc.begin(), inc.end());
  rep.adm_converges = !radii.empty() && (max_inc < 1e-12 || (rep.adm_increment_fit.ok &&
                                                            rep.adm_increment_fit.exponent > 0.0 &&
                                                            rep.adm_increment_fit.residual < kFitResidualGate));
  if (!radii.empty()) {
    if (rep.adm_converges && radii.size() >= 2) {
      for (int c = 0; c < 3; ++c) {
        std::vector<double> y;
        for (const auto& v : rep.adm_integrals) y.push_back(v[c]);
        rep.adm_extrapolated[c] = richardson_limit(radii, y);
      }
    } else {
      rep.adm_extrapolated = rep.adm_integrals.back();
    }
  }
  if (!rep.cmc_centers.empty()) rep.final_gap = (rep.cmc_centers.back() - rep.adm_extrapolated).norm();
  return rep;
}

}  // namespace cmclab
