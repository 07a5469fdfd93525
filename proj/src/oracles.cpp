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

#include "cmclab/oracles.hpp"

#include <cmath>
#include <numbers>

#include "cmclab/errors.hpp"

namespace cmclab::oracles {

namespace {

constexpr double kPi = std::numbers::pi;

class EvolvedMetric : public MetricModel {
 public:
  EvolvedMetric(DataPtr data, double h)
      : MetricModel("evolved", data->base().mass(), data->base().r_min(), data->base().origin(), data->base().decay()),
        data_(std::move(data)),
        h_(h) {}
  MetricPtr reference() const override { return data_->base().reference(); }

 protected:
  MetricSample eval(const Vec3& x, int order) const override {
    MetricSample s = data_->base().evaluate(x, order);
    const KbarSample k = data_->kbar(x);
    const Jet a = data_->lapse(x);
    s.g -= 2.0 * h_ * a.v * k.k;
    if (order >= 1)
      for (int l = 0; l < 3; ++l) s.dg[l] -= 2.0 * h_ * (a.d[l] * k.k + a.v * k.dk[l]);
    return s;
  }

 private:
  DataPtr data_;
  double h_;
};

}  // namespace

double schwarzschild_sphere_H(double r, double m) {
  const double phi = 1.0 + m / (2.0 * r);
  return -(2.0 / r - 2.0 * m / (r * r * phi)) / (phi * phi);
}

double schwarzschild_radius(double sigma, double m) {
  const double target = 2.0 / sigma - 4.0 * m / (sigma * sigma);
  auto f = [&](double r) { return -schwarzschild_sphere_H(r, m) - target; };
  double a = sigma / 4.0 + m, b = 8.0 * sigma;
  if (f(a) * f(b) > 0.0) fail(ErrorKind::solver, "oracle bracket failed");
  for (int i = 0; i < 300; ++i) {
    const double c = 0.5 * (a + b);
    if (c == a || c == b) break;
    (f(a) * f(c) <= 0.0 ? b : a) = c;
  }
  return 0.5 * (a + b);
}

MetricPtr evolved_metric(const DataPtr& data, double h) { return std::make_shared<EvolvedMetric>(data, h); }

Eigen::VectorXd fd_lapse_rhs(const SurfaceEmbedding& surface, const DataPtr& data, double h) {
  const auto gp = compute_geometry(surface, *evolved_metric(data, h));
  const auto gm = compute_geometry(surface, *evolved_metric(data, -h));
  return -(gp.H - gm.H) / (2.0 * h);
}

Vec3 fd_leaf_velocity(const DataPtr& data, double sigma, double h, const SolverConfig& config) {
  SolverConfig cfg = config;
  cfg.eigen_count = 0;
  const Leaf base = solve_cmc(data->base(), sigma, cfg);
  const Leaf lp = solve_cmc(*evolved_metric(data, h), sigma, cfg, base.surface);
  const Leaf lm = solve_cmc(*evolved_metric(data, -h), sigma, cfg, base.surface);
  return (lp.diag.center - lm.diag.center) / (2.0 * h);
}

Vec3 adm_center_midpoint(const MetricModel& model, double rho, int nt) {
  const double m = model.mass();
  const int np = 2 * nt;
  const double dt = kPi / nt, dp = 2.0 * kPi / np;
  const double fd = 1e-4 * rho;
  Vec3 sum = Vec3::Zero();
  for (int i = 0; i < nt; ++i) {
    const double t = (i + 0.5) * dt;
    Vec3 ring = Vec3::Zero();
    for (int j = 0; j < np; ++j) {
      const double p = (j + 0.5) * dp;
      const Vec3 n(std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t));
      const Vec3 x = rho * n;
      std::array<Mat3, 3> dg;
      for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Zero();
        e[k] = fd;
        // fourth-order central difference
        dg[k] = (-model.metric(x + 2 * e) + 8.0 * model.metric(x + e) - 8.0 * model.metric(x - e) +
                 model.metric(x - 2 * e)) /
                (12.0 * fd);
      }
      const Mat3 g = model.metric(x);
      Vec3 div_minus_grad = Vec3::Zero();
      for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j) div_minus_grad[k] += dg[j](j, k) - dg[k](j, j);
      ring += x * div_minus_grad.dot(n) - g * n + g.trace() * n;
    }
    sum += ring * std::sin(t);
  }
  return sum * dt * dp * rho * rho / (16.0 * kPi * m);
}

Vec3 euclidean_center_midpoint(const SurfaceEmbedding& surface, int nt) {
  const int np = 2 * nt;
  const double dt = kPi / nt, dp = 2.0 * kPi / np;
  const Vec3 c = surface.center();
  // area element of r(N) N: r sqrt(r^2 + |grad r|^2) dOmega, gradient by differences
  auto r_at = [&](double t, double p) {
    return evaluate(surface.rho(), Vec3(std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t)));
  };
  const double h = 1e-5;
  Vec3 num = Vec3::Zero();
  double den = 0.0;
  for (int i = 0; i < nt; ++i) {
    const double t = (i + 0.5) * dt;
    for (int j = 0; j < np; ++j) {
      const double p = (j + 0.5) * dp;
      const double r = r_at(t, p);
      const double rt = (r_at(t + h, p) - r_at(t - h, p)) / (2 * h);
      const double rp = (r_at(t, p + h) - r_at(t, p - h)) / (2 * h) / std::sin(t);
      const double dA = r * std::sqrt(r * r + rt * rt + rp * rp) * std::sin(t) * dt * dp;
      const Vec3 n(std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t));
      num += (c + r * n) * dA;
      den += dA;
    }
  }
  return num / den;
}

Vec3 momentum_flux_refined(const SurfaceEmbedding& surface, const InitialDataModel& data, int band_limit) {
  const SurfaceEmbedding fine(surface.center(), resample(surface.rho(), SphericalGrid::shared(band_limit)));
  const auto geom = compute_geometry(fine, data.base());
  Vec3 sum = Vec3::Zero();
  for (int n = 0; n < geom.size(); ++n) {
    const Mat3& g = geom.gbar[n];
    const Mat3 k = data.kbar(geom.x.col(n)).k;
    const Mat3 Pi = (g.inverse() * k).trace() * g - k;
    sum += geom.dmu[n] * (Pi * geom.nu.col(n));
  }
  return sum / (8.0 * kPi);
}

LinearizationCheck linearization_check(const SurfaceEmbedding& surface, const MetricModel& model,
                                       const ScalarField& u, const std::vector<double>& h) {
  const auto geom = compute_geometry(surface, model);
  require_same_grid(geom.grid, u.grid());
  const ScalarField Lu = stability_operator_apply(geom, u).Lf;
  const ScalarField drho(geom.grid, u.values().cwiseQuotient(geom.n_dot_nu));
  const SpectralCoeffs dc = analyze(drho);
  LinearizationCheck out;
  out.h = h;
  const double s2 = geom.sigma * geom.sigma;
  for (double hh : h) {
    const SurfaceEmbedding moved(surface.center(),
                                 SpectralCoeffs(geom.grid, surface.rho().values() + hh * dc.values()));
    const auto gm = compute_geometry(moved, model);
    const Eigen::VectorXd quotient = (gm.H - geom.H) / hh;
    out.error.push_back((quotient - Lu.values()).cwiseAbs().maxCoeff() * s2);
  }
  const PowerFit fit = fit_power_law(h, out.error);
  out.order = -fit.exponent;
  return out;
}

}  // namespace cmclab::oracles
