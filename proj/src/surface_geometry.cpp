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

#include "cmclab/surface_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "cmclab/errors.hpp"

namespace cmclab {

namespace {

// Coordinate derivatives of the embedding at every node.
struct EmbeddingJets {
  Eigen::VectorXd rho;
  std::vector<Vec3> x, xt, xp, xtt, xtp, xpp;
};

EmbeddingJets embedding_jets(const SurfaceEmbedding& s) {
  const auto& g = *s.grid();
  const int N = g.size();
  const auto d = synthesize_derivatives(s.rho());
  EmbeddingJets j;
  j.rho = d.f;
  for (auto* v : {&j.x, &j.xt, &j.xp, &j.xtt, &j.xtp, &j.xpp}) v->resize(N);
  for (int n = 0; n < N; ++n) {
    const int ring = g.ring_of(n);
    const double st = g.sin_colatitude(ring), ct = std::cos(g.colatitude(ring));
    const Vec3& Nn = g.direction(n);
    const Vec3& et = g.e_theta(n);
    const Vec3& ep = g.e_phi(n);
    const double r = d.f[n];
    if (!(r > 0.0)) fail(ErrorKind::domain, "radial function not positive at node " + std::to_string(n));
    j.x[n] = s.center() + r * Nn;
    j.xt[n] = d.f_t[n] * Nn + r * et;
    j.xp[n] = d.f_p[n] * Nn + r * st * ep;
    j.xtt[n] = d.f_tt[n] * Nn + 2.0 * d.f_t[n] * et - r * Nn;
    j.xtp[n] = d.f_tp[n] * Nn + d.f_t[n] * st * ep + d.f_p[n] * et + r * ct * ep;
    j.xpp[n] = d.f_pp[n] * Nn + 2.0 * d.f_p[n] * st * ep - r * st * (st * Nn + ct * et);
  }
  return j;
}

Vec3 gamma_apply(const Tensor3& G, const Vec3& u, const Vec3& v) {
  Vec3 out;
  for (int k = 0; k < 3; ++k) out[k] = u.dot(G[k] * v);
  return out;
}

double lp(const Eigen::VectorXd& dmu, const Eigen::VectorXd& v, double p) {
  if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
  if (p == 1.0) return dmu.dot(v.cwiseAbs());
  if (p == 2.0) return std::sqrt(dmu.dot(v.cwiseAbs2()));
  return std::pow(dmu.dot(v.cwiseAbs().array().pow(p).matrix()), 1.0 / p);
}

}  // namespace

// --- SurfaceEmbedding --------------------------------------------------------

SurfaceEmbedding::SurfaceEmbedding(Vec3 center, SpectralCoeffs rho)
    : center_(std::move(center)), rho_(std::move(rho)) {}

SurfaceEmbedding SurfaceEmbedding::round_sphere(GridPtr grid, const Vec3& center, double radius) {
  if (!(radius > 0.0)) fail(ErrorKind::domain, "sphere radius must be positive");
  SpectralCoeffs c(std::move(grid));
  c(0, 0) = radius * std::sqrt(4.0 * std::numbers::pi);
  return {center, c};
}

Vec3 SurfaceEmbedding::position(int node) const {
  const Vec3& n = grid()->direction(node);
  return center_ + evaluate(rho_, n) * n;
}

SurfaceEmbedding SurfaceEmbedding::scaled(double factor) const {
  SpectralCoeffs c(rho_.grid(), rho_.values() * factor);
  return {center_, c};
}

double SurfaceEmbedding::radius_from(const Vec3& c2, const Vec3& n) const {
  const Vec3 d = c2 - center_;
  // F(t) = |c2 + t n - c| - rho(direction) changes sign on [0, tmax].
  auto F = [&](double t) {
    const Vec3 p = d + t * n;
    const double r = p.norm();
    return r - evaluate(rho_, p / r);
  };
  if (d.norm() == 0.0) return evaluate(rho_, n);
  const double rmax = std::abs(rho_(0, 0)) / std::sqrt(4.0 * std::numbers::pi);
  double a = 0.0, b = d.norm() + 3.0 * rmax;
  double fa = F(a), fb = F(b);
  if (fa >= 0.0 || fb <= 0.0) fail(ErrorKind::domain, "recentering: new center is not inside the surface");
  // Illinois regula falsi.
  int side = 0;
  double t = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    t = (a * fb - b * fa) / (fb - fa);
    const double ft = F(t);
    if (std::abs(ft) <= 1e-15 * std::max(1.0, t) || (b - a) < 1e-15 * std::max(1.0, t)) break;
    if (ft * fb > 0.0) {
      b = t;
      fb = ft;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = t;
      fa = ft;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
  }
  return t;
}

SurfaceEmbedding SurfaceEmbedding::recentered(const Vec3& new_center) const {
  const auto& g = grid();
  ScalarField r(g);
  for (int n = 0; n < g->size(); ++n) r[n] = radius_from(new_center, g->direction(n));
  return {new_center, analyze(r)};
}

std::string SurfaceEmbedding::to_json() const {
  nlohmann::json j;
  j["center"] = {center_.x(), center_.y(), center_.z()};
  j["bandLimit"] = grid()->band_limit();
  j["rho"] = std::vector<double>(rho_.values().data(), rho_.values().data() + rho_.values().size());
  return j.dump();
}

SurfaceEmbedding SurfaceEmbedding::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorKind::io, std::string("surface JSON: ") + e.what());
  }
  if (!j.contains("center") || !j.contains("bandLimit") || !j.contains("rho"))
    fail(ErrorKind::io, "surface JSON: expected keys center, bandLimit, rho");
  const auto c = j["center"].get<std::vector<double>>();
  if (c.size() != 3) fail(ErrorKind::io, "surface JSON: center must have 3 entries");
  auto grid = SphericalGrid::shared(j["bandLimit"].get<int>());
  const auto rho = j["rho"].get<std::vector<double>>();
  if (static_cast<int>(rho.size()) != grid->num_coeffs())
    fail(ErrorKind::grid_mismatch, "surface JSON: rho has wrong number of coefficients");
  return {Vec3(c[0], c[1], c[2]), SpectralCoeffs(grid, Eigen::Map<const Eigen::VectorXd>(rho.data(), rho.size()))};
}

// --- geometry ------------------------------------------------------------------

Eigen::Matrix2d SurfaceGeometry::G(int n) const {
  Eigen::Matrix2d m;
  m << G11[n], G12[n], G12[n], G22[n];
  return m;
}

Eigen::Matrix2d SurfaceGeometry::G_inv(int n) const {
  const double det = G11[n] * G22[n] - G12[n] * G12[n];
  Eigen::Matrix2d m;
  m << G22[n], -G12[n], -G12[n], G11[n];
  return m / det;
}

double mean_curvature_radius(double H, double m) {
  if (H >= 0.0) fail(ErrorKind::domain, "mean curvature radius undefined for H >= 0");
  const double disc = 1.0 + 4.0 * m * H;
  if (m == 0.0 || disc < 0.0) return -2.0 / H;
  return (-1.0 - std::sqrt(disc)) / H;
}

SurfaceGeometry compute_geometry(const SurfaceEmbedding& surface, const MetricModel& model) {
  const auto jets = embedding_jets(surface);
  const auto& grid = *surface.grid();
  const int N = grid.size();
  SurfaceGeometry g;
  g.grid = surface.grid();
  g.center = surface.center();
  g.mass = model.mass();
  g.x.resize(3, N);
  g.X1.resize(3, N);
  g.X2.resize(3, N);
  g.nu.resize(3, N);
  g.nu_low.resize(3, N);
  g.gbar.resize(N);
  g.gam.resize(N);
  for (auto* v : {&g.G11, &g.G12, &g.G22, &g.sqrtG, &g.k11, &g.k12, &g.k22, &g.H, &g.k_sq, &g.kring_norm,
                  &g.ric_nn, &g.n_dot_nu, &g.dmu, &g.dH2})
    v->resize(N);

  for (int n = 0; n < N; ++n) {
    if (!model.in_domain(jets.x[n])) model.evaluate(jets.x[n], 0);  // raises
  }

#pragma omp parallel for schedule(static)
  for (int n = 0; n < N; ++n) {
    const double st = grid.sin_colatitude(grid.ring_of(n));
    const MetricSample ms = model.evaluate(jets.x[n], 2);
    const Mat3& gm = ms.g;
    const Mat3 gi = gm.inverse();
    const Tensor3 Gam = christoffel(ms);
    const Mat3 Ric = ricci(ms);

    const Vec3 &xt = jets.xt[n], &xp = jets.xp[n];
    const Vec3 X1 = xt, X2 = xp / st;
    const Vec3 omega = X1.cross(X2);
    const double onorm = std::sqrt(omega.dot(gi * omega));
    const Vec3 nu_low = omega / onorm;
    const Vec3 nu = gi * nu_low;

    // Covariant second derivatives (coordinate basis).
    const Vec3 Dtt = jets.xtt[n] + gamma_apply(Gam, xt, xt);
    const Vec3 Dtp = jets.xtp[n] + gamma_apply(Gam, xt, xp);
    const Vec3 Dpp = jets.xpp[n] + gamma_apply(Gam, xp, xp);

    Eigen::Matrix2d Gc;
    Gc << xt.dot(gm * xt), xt.dot(gm * xp), xt.dot(gm * xp), xp.dot(gm * xp);
    Eigen::Matrix2d kc;
    kc << nu_low.dot(Dtt), nu_low.dot(Dtp), nu_low.dot(Dtp), nu_low.dot(Dpp);
    const Eigen::Matrix2d Gci = Gc.inverse();
    const Eigen::Matrix2d S = Gci * kc;  // shape operator
    const double H = S.trace();
    const double ksq = (S * S).trace();

    g.x.col(n) = jets.x[n];
    g.X1.col(n) = X1;
    g.X2.col(n) = X2;
    g.nu.col(n) = nu;
    g.nu_low.col(n) = nu_low;
    g.gbar[n] = gm;
    g.G11[n] = Gc(0, 0);
    g.G12[n] = Gc(0, 1) / st;
    g.G22[n] = Gc(1, 1) / (st * st);
    g.sqrtG[n] = std::sqrt(g.G11[n] * g.G22[n] - g.G12[n] * g.G12[n]);
    g.k11[n] = kc(0, 0);
    g.k12[n] = kc(0, 1) / st;
    g.k22[n] = kc(1, 1) / (st * st);
    g.H[n] = H;
    g.k_sq[n] = ksq;
    g.kring_norm[n] = std::sqrt(std::max(0.0, ksq - 0.5 * H * H));
    g.ric_nn[n] = nu.dot(Ric * nu);
    g.n_dot_nu[n] = grid.direction(n).dot(nu_low);
    g.dmu[n] = grid.weight(n) * g.sqrtG[n];
    g.dH2[n] = grid.weight(n) * X1.cross(X2).norm();

    const Vec3 gxt = gm * xt, gxp = gm * xp;
    for (int c = 0; c < 2; ++c) {
      Eigen::Matrix2d m;
      const double t0 = Gci(c, 0), t1 = Gci(c, 1);
      m(0, 0) = t0 * gxt.dot(Dtt) + t1 * gxp.dot(Dtt);
      m(0, 1) = m(1, 0) = t0 * gxt.dot(Dtp) + t1 * gxp.dot(Dtp);
      m(1, 1) = t0 * gxt.dot(Dpp) + t1 * gxp.dot(Dpp);
      g.gam[n][c] = m;
    }
  }

  g.area = g.dmu.sum();
  g.euclidean_area = g.dH2.sum();
  g.mean_H = g.dmu.dot(g.H) / g.area;
  g.sigma = g.mean_H < 0.0 ? mean_curvature_radius(g.mean_H, g.mass) : 0.0;
  return g;
}

// --- stability operator ---------------------------------------------------------

StabilityOperator StabilityOperator::assemble(const SurfaceGeometry& geom, bool with_mass) {
  const auto& grid = *geom.grid;
  const auto& Y = grid.basis();
  const auto& Dt = grid.basis_dtheta();
  const auto& Dp = grid.basis_dphi();
  const int N = grid.size(), B = grid.num_coeffs();

  Eigen::MatrixXd E(2 * N, B);
#pragma omp parallel for schedule(static)
  for (int n = 0; n < N; ++n) {
    // Cholesky factor C of dmu * G^{-1}, so E^T E sums grad Y^T (dmu G^-1) grad Y.
    const Eigen::Matrix2d W = geom.dmu[n] * geom.G_inv(n);
    const double c00 = std::sqrt(W(0, 0));
    const double c10 = W(1, 0) / c00;
    const double c11 = std::sqrt(W(1, 1) - c10 * c10);
    E.row(2 * n) = c00 * Dt.row(n) + c10 * Dp.row(n);
    E.row(2 * n + 1) = c11 * Dp.row(n);
  }
  StabilityOperator op;
  op.K = Eigen::MatrixXd::Zero(B, B);
  op.K.selfadjointView<Eigen::Lower>().rankUpdate(E.transpose());
  op.K.triangularView<Eigen::StrictlyUpper>() = op.K.transpose();

  const Eigen::VectorXd pot = geom.dmu.cwiseProduct(geom.k_sq + geom.ric_nn);
  Eigen::MatrixXd V = Y.transpose() * (pot.asDiagonal() * Y);
  V = 0.5 * (V + V.transpose()).eval();
  op.A = V - op.K;
  if (with_mass) {
    Eigen::MatrixXd F = geom.dmu.cwiseSqrt().asDiagonal() * Y;
    op.M = Eigen::MatrixXd::Zero(B, B);
    op.M.selfadjointView<Eigen::Lower>().rankUpdate(F.transpose());
    op.M.triangularView<Eigen::StrictlyUpper>() = op.M.transpose();
  }
  return op;
}

Eigen::VectorXd weak_rhs(const SurfaceGeometry& geom, const Eigen::VectorXd& f) {
  return geom.grid->basis().transpose() * geom.dmu.cwiseProduct(f);
}

Eigen::VectorXd project(const SurfaceGeometry& geom, const StabilityOperator& op, const Eigen::VectorXd& f) {
  if (op.M.size() == 0) fail(ErrorKind::solver, "projection requires the mass matrix");
  return op.M.llt().solve(weak_rhs(geom, f));
}

OperatorApplyResult stability_operator_apply(const SurfaceGeometry& geom, const ScalarField& f) {
  require_same_grid(geom.grid, f.grid());
  const auto op = StabilityOperator::assemble(geom);
  const Eigen::VectorXd c = analyze(f).values();
  const Eigen::VectorXd l = op.M.llt().solve(op.A * c);
  OperatorApplyResult out;
  out.Lf = ScalarField(geom.grid, geom.grid->basis() * l);
  const int L = geom.grid->band_limit();
  out.tail_fraction = spectral_tail_fraction(SpectralCoeffs(geom.grid, l), (3 * L) / 4 + 1);
  out.resolution_warning = out.tail_fraction > 0.01;
  return out;
}

namespace {

std::vector<Eigenpair> pack_eigenpairs(const SurfaceGeometry& geom, const Eigen::VectorXd& lam,
                                       const Eigen::MatrixXd& vec, int n) {
  std::vector<int> order(lam.size());
  for (int i = 0; i < lam.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(lam[a]) < std::abs(lam[b]); });
  std::vector<Eigenpair> out;
  for (int i = 0; i < n && i < static_cast<int>(order.size()); ++i) {
    Eigenpair e;
    e.lambda = lam[order[i]];
    Eigen::VectorXd v = vec.col(order[i]);
    // Fix the sign so the largest coefficient is positive (deterministic output).
    Eigen::Index imax;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0) v = -v;
    e.field = ScalarField(geom.grid, geom.grid->basis() * v);
    e.degree1_fraction = degree_energy_fraction(SpectralCoeffs(geom.grid, v), 1);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

std::vector<Eigenpair> low_eigenpairs(const SurfaceGeometry& geom, int n) {
  return low_eigenpairs(geom, StabilityOperator::assemble(geom), n);
}

std::vector<Eigenpair> low_eigenpairs(const SurfaceGeometry& geom, const StabilityOperator& op, int n) {
  if (n < 1 || n > 10) fail(ErrorKind::configuration, "eigen_count must lie in [1, 10]");
  const int B = static_cast<int>(op.A.rows());
  const Eigen::MatrixXd negA = -op.A;
  if (geom.grid->band_limit() <= 32) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(negA, op.M);
    if (es.info() != Eigen::Success) fail(ErrorKind::solver, "generalized eigensolver failed");
    return pack_eigenpairs(geom, es.eigenvalues(), es.eigenvectors(), n);
  }
  // Shift-invert subspace iteration about a tiny shift.
  const double scale = geom.sigma > 0 ? 1.0 / (geom.sigma * geom.sigma) : 1.0;
  const double shift = -1e-9 * scale;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(negA - shift * op.M);
  const int q = std::min(B, n + 6);
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd X(B, q);
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < B; ++i) X(i, j) = nd(rng);
  Eigen::VectorXd prev = Eigen::VectorXd::Constant(q, std::numeric_limits<double>::infinity());
  Eigen::VectorXd lam;
  Eigen::MatrixXd V;
  for (int it = 0; it < 500; ++it) {
    Eigen::MatrixXd Z = lu.solve(op.M * X);
    const Eigen::MatrixXd Ar = Z.transpose() * negA * Z;
    const Eigen::MatrixXd Mr = Z.transpose() * op.M * Z;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Ar + Ar.transpose()),
                                                                  0.5 * (Mr + Mr.transpose()));
    if (es.info() != Eigen::Success) fail(ErrorKind::solver, "Rayleigh-Ritz step failed");
    lam = es.eigenvalues();
    X = Z * es.eigenvectors();
    // Converged when the wanted n Ritz values settle.
    std::vector<double> a(lam.data(), lam.data() + q), b(prev.data(), prev.data() + q);
    std::sort(a.begin(), a.end(), [](double u, double v) { return std::abs(u) < std::abs(v); });
    std::sort(b.begin(), b.end(), [](double u, double v) { return std::abs(u) < std::abs(v); });
    double change = 0.0;
    for (int i = 0; i < n; ++i) change = std::max(change, std::abs(a[i] - b[i]) / std::max(std::abs(a[i]), 1e-300));
    prev = lam;
    if (it > 2 && change < 1e-12) return pack_eigenpairs(geom, lam, X, n);
  }
  fail(ErrorKind::solver, "shift-invert eigen iteration did not converge");
}

// --- norms and centers ------------------------------------------------------------

double sobolev_norm(const SurfaceGeometry& geom, const ScalarField& f, int k, double p, double sigma) {
  require_same_grid(geom.grid, f.grid());
  if (k < 0 || k > 2) fail(ErrorKind::configuration, "sobolev order must be 0, 1 or 2");
  if (!(p == 1.0 || p == 2.0 || std::isinf(p))) fail(ErrorKind::configuration, "sobolev exponent must be 1, 2 or inf");
  if (sigma <= 0.0) sigma = geom.sigma;
  double out = lp(geom.dmu, f.values(), p);
  if (k == 0) return out;
  const auto& grid = *geom.grid;
  const int N = grid.size();
  const auto d = synthesize_derivatives(analyze(f));
  Eigen::VectorXd grad(N), hess(N);
  for (int n = 0; n < N; ++n) {
    const double st = grid.sin_colatitude(grid.ring_of(n));
    Eigen::Vector2d df(d.f_t[n], d.f_p[n]);
    Eigen::Matrix2d Gc;
    Gc << geom.G11[n], st * geom.G12[n], st * geom.G12[n], st * st * geom.G22[n];
    const Eigen::Matrix2d Gci = Gc.inverse();
    grad[n] = std::sqrt(std::max(0.0, df.dot(Gci * df)));
    if (k == 2) {
      Eigen::Matrix2d h;
      h << d.f_tt[n], d.f_tp[n], d.f_tp[n], d.f_pp[n];
      for (int c = 0; c < 2; ++c) h -= geom.gam[n][c] * df[c];
      hess[n] = std::sqrt(std::max(0.0, (Gci * h * Gci * h.transpose()).trace()));
    }
  }
  out += sigma * lp(geom.dmu, grad, p);
  if (k == 2) out += sigma * sigma * lp(geom.dmu, hess, p);
  return out;
}

double kring_lp_norm(const SurfaceGeometry& geom, double p) { return lp(geom.dmu, geom.kring_norm, p); }

Vec3 euclidean_center(const SurfaceEmbedding& surface) {
  const auto jets = embedding_jets(surface);
  const auto& grid = *surface.grid();
  Vec3 num = Vec3::Zero();
  double den = 0.0;
  for (int n = 0; n < grid.size(); ++n) {
    const double st = grid.sin_colatitude(grid.ring_of(n));
    const double w = grid.weight(n) * jets.xt[n].cross(jets.xp[n] / st).norm();
    // Positions relative to the graph center keep translation exact.
    num += w * (jets.x[n] - surface.center());
    den += w;
  }
  return surface.center() + num / den;
}

Vec3 euclidean_center(const SurfaceGeometry& geom, CenterMeasure measure) {
  const Eigen::VectorXd& w = measure == CenterMeasure::euclidean ? geom.dH2 : geom.dmu;
  Vec3 num = Vec3::Zero();
  for (int n = 0; n < geom.size(); ++n) num += w[n] * (geom.x.col(n) - geom.center);
  return geom.center + num / w.sum();
}

}  // namespace cmclab
