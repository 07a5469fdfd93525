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

#include "cmclab/metric_models.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "cmclab/errors.hpp"
#include "cmclab/fits.hpp"

namespace cmclab {

namespace {

Tensor3 zero3() {
  Tensor3 t;
  for (auto& m : t) m.setZero();
  return t;
}

Tensor4 zero4() {
  Tensor4 t;
  for (auto& row : t)
    for (auto& m : row) m.setZero();
  return t;
}

std::string vec_str(const Vec3& v) {
  std::ostringstream os;
  os << "(" << v.x() << ", " << v.y() << ", " << v.z() << ")";
  return os.str();
}

Jet radial_power(const Vec3& x, double s) {
  const double r = x.norm();
  Jet j;
  j.v = std::pow(r, s);
  const double a = s * std::pow(r, s - 2.0);
  j.d = a * x;
  j.dd = a * Mat3::Identity() + s * (s - 2.0) * std::pow(r, s - 4.0) * x * x.transpose();
  return j;
}

// Conformally flat metric psi(x) * delta with psi given as a jet in the
// coordinates relative to the origin.
class ConformalModel final : public MetricModel {
 public:
  using Factor = std::function<Jet(const Vec3&)>;

  ConformalModel(std::string name, double m, double r_min, DecayClass decay, Factor psi)
      : MetricModel(std::move(name), m, r_min, Vec3::Zero(), decay), psi_(std::move(psi)) {}

  MetricPtr reference() const override {
    return mass() > 0.0 ? schwarzschild(mass()) : euclidean();
  }

 protected:
  MetricSample eval(const Vec3& x, int order) const override {
    const Jet p = psi_(x);
    MetricSample s;
    s.g = p.v * Mat3::Identity();
    s.dg = zero3();
    s.ddg = zero4();
    if (order >= 1)
      for (int k = 0; k < 3; ++k) s.dg[k] = p.d[k] * Mat3::Identity();
    if (order >= 2)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) s.ddg[k][l] = p.dd(k, l) * Mat3::Identity();
    return s;
  }

 private:
  Factor psi_;
};

class EuclideanModel final : public MetricModel {
 public:
  EuclideanModel() : MetricModel("euclidean", 0.0, 0.0, Vec3::Zero(), DecayClass{}) {}
  MetricPtr reference() const override { return euclidean(); }

 protected:
  MetricSample eval(const Vec3&, int) const override {
    MetricSample s;
    s.dg = zero3();
    s.ddg = zero4();
    return s;
  }
};

class TranslatedModel final : public MetricModel {
 public:
  TranslatedModel(MetricPtr base, const Vec3& a)
      : MetricModel(base->name() + "+translate", base->mass(), base->r_min(), base->origin() + a,
                    base->decay()),
        base_(std::move(base)),
        a_(a) {}

  MetricPtr reference() const override { return translated(base_->reference(), a_); }

 protected:
  MetricSample eval(const Vec3& x, int order) const override { return base_->evaluate(x - a_, order); }

 private:
  MetricPtr base_;
  Vec3 a_;
};

class InterpolatedModel final : public MetricModel {
 public:
  InterpolatedModel(MetricPtr base, double tau)
      : MetricModel(base->name() + "+interpolate", base->mass(), base->r_min(), base->origin(),
                    base->decay()),
        base_(std::move(base)),
        ref_(base_->reference()),
        tau_(tau) {}

  MetricPtr reference() const override { return ref_; }

 protected:
  MetricSample eval(const Vec3& x, int order) const override {
    if (tau_ == 0.0) return ref_->evaluate(x, order);
    if (tau_ == 1.0) return base_->evaluate(x, order);
    const MetricSample a = ref_->evaluate(x, order);
    const MetricSample b = base_->evaluate(x, order);
    MetricSample s;
    s.g = a.g + tau_ * (b.g - a.g);
    for (int k = 0; k < 3; ++k) {
      s.dg[k] = a.dg[k] + tau_ * (b.dg[k] - a.dg[k]);
      for (int l = 0; l < 3; ++l) s.ddg[k][l] = a.ddg[k][l] + tau_ * (b.ddg[k][l] - a.ddg[k][l]);
    }
    return s;
  }

 private:
  MetricPtr base_;
  MetricPtr ref_;
  double tau_;
};

}  // namespace

MetricSample MetricModel::evaluate(const Vec3& x, int order) const {
  if (!in_domain(x)) {
    fail(ErrorKind::domain, "point " + vec_str(x) + " inside exclusion radius " + std::to_string(r_min_) +
                                " of model '" + name_ + "'");
  }
  return eval(x, order);
}

Jet schwarzschild_factor(double m, const Vec3& x) {
  const double r = x.norm();
  const double phi = 1.0 + m / (2.0 * r);
  const Vec3 dphi = -m / (2.0 * r * r * r) * x;
  const Mat3 ddphi = -m / 2.0 * (Mat3::Identity() / (r * r * r) - 3.0 * x * x.transpose() / std::pow(r, 5));
  Jet j;
  j.v = std::pow(phi, 4);
  j.d = 4.0 * phi * phi * phi * dphi;
  j.dd = 12.0 * phi * phi * dphi * dphi.transpose() + 4.0 * phi * phi * phi * ddphi;
  return j;
}

Jet schwarzschild_lapse(double m, const Vec3& x) {
  Jet j;
  if (m == 0.0) {
    j.v = 1.0;
    return j;
  }
  const double r = x.norm();
  const double u = 2.0 * m / r;
  const Vec3 du = -2.0 * m / (r * r * r) * x;
  const Mat3 ddu = -2.0 * m * (Mat3::Identity() / (r * r * r) - 3.0 * x * x.transpose() / std::pow(r, 5));
  const double a1 = -2.0 / ((1.0 + u) * (1.0 + u));
  const double a2 = 4.0 / std::pow(1.0 + u, 3);
  j.v = (1.0 - u) / (1.0 + u);
  j.d = a1 * du;
  j.dd = a2 * du * du.transpose() + a1 * ddu;
  return j;
}

MetricPtr euclidean() { return std::make_shared<EuclideanModel>(); }

MetricPtr schwarzschild(double m) {
  if (!(m > 0.0)) fail(ErrorKind::model, "schwarzschild: mass must be > 0, got " + std::to_string(m));
  return std::make_shared<ConformalModel>("schwarzschild", m, std::max(4.0 * m, 1.0), DecayClass{},
                                          [m](const Vec3& x) { return schwarzschild_factor(m, x); });
}

MetricPtr perturbed_schwarzschild(double m, double epsilon, double amplitude, const std::string& shape) {
  if (!(m > 0.0)) fail(ErrorKind::model, "perturbed: mass must be > 0, got " + std::to_string(m));
  if (!(epsilon > 0.0)) fail(ErrorKind::model, "perturbed: epsilon must be > 0, got " + std::to_string(epsilon));
  DecayClass decay;
  decay.epsilon = epsilon;
  // bounds the order 0..2 constants of both shapes
  decay.cbar = std::abs(amplitude) * (2.0 + epsilon) * (4.0 + epsilon);
  const double A = amplitude;
  ConformalModel::Factor psi;
  if (shape == "even") {
    psi = [m, A, epsilon](const Vec3& x) {
      Jet s = schwarzschild_factor(m, x);
      const Jet p = radial_power(x, -(1.0 + epsilon));
      s.v += A * p.v;
      s.d += A * p.d;
      s.dd += A * p.dd;
      return s;
    };
  } else if (shape == "odd") {
    psi = [m, A, epsilon](const Vec3& x) {
      Jet s = schwarzschild_factor(m, x);
      const Jet q = radial_power(x, -(2.0 + epsilon));
      const Vec3 e1 = Vec3::UnitX();
      s.v += A * x.x() * q.v;
      s.d += A * (q.v * e1 + x.x() * q.d);
      s.dd += A * (e1 * q.d.transpose() + q.d * e1.transpose() + x.x() * q.dd);
      return s;
    };
  } else {
    fail(ErrorKind::model, "perturbed: unknown shape '" + shape + "' (expected even or odd)");
  }
  return std::make_shared<ConformalModel>("perturbed-" + shape, m, std::max(4.0 * m, 1.0), decay, psi);
}

MetricPtr translated(MetricPtr base, const Vec3& a) {
  if (!base) fail(ErrorKind::model, "translated: null base model");
  return std::make_shared<TranslatedModel>(std::move(base), a);
}

MetricPtr interpolated(MetricPtr base, double tau) {
  if (!base) fail(ErrorKind::model, "interpolated: null base model");
  if (!(tau >= 0.0 && tau <= 1.0))
    fail(ErrorKind::model, "interpolated: tau must lie in [0, 1], got " + std::to_string(tau));
  return std::make_shared<InterpolatedModel>(std::move(base), tau);
}

// --- curvature -------------------------------------------------------------

Tensor3 christoffel(const MetricSample& s) {
  const Mat3 gi = s.g.inverse();
  Tensor3 low;  // Gamma_{q ij}
  for (int q = 0; q < 3; ++q)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) low[q](i, j) = 0.5 * (s.dg[i](q, j) + s.dg[j](q, i) - s.dg[q](i, j));
  Tensor3 G = zero3();
  for (int k = 0; k < 3; ++k)
    for (int q = 0; q < 3; ++q) G[k] += gi(k, q) * low[q];
  return G;
}

Mat3 ricci(const MetricSample& s) {
  const Mat3 gi = s.g.inverse();
  const Tensor3 G = christoffel(s);
  Tensor3 low;
  for (int q = 0; q < 3; ++q)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) low[q](i, j) = 0.5 * (s.dg[i](q, j) + s.dg[j](q, i) - s.dg[q](i, j));
  // dG[l][k](i, j) = d_l Gamma^k_ij
  Tensor4 dG = zero4();
  for (int l = 0; l < 3; ++l) {
    const Mat3 dgi = -gi * s.dg[l] * gi;
    for (int q = 0; q < 3; ++q) {
      Mat3 dlow;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          dlow(i, j) = 0.5 * (s.ddg[l][i](q, j) + s.ddg[l][j](q, i) - s.ddg[l][q](i, j));
      for (int k = 0; k < 3; ++k) dG[l][k] += dgi(k, q) * low[q] + gi(k, q) * dlow;
    }
  }
  Mat3 R = Mat3::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double v = 0.0;
      for (int k = 0; k < 3; ++k) {
        v += dG[k][k](i, j) - dG[j][k](i, k);
        for (int p = 0; p < 3; ++p) v += G[k](k, p) * G[p](i, j) - G[k](j, p) * G[p](i, k);
      }
      R(i, j) = v;
    }
  }
  return 0.5 * (R + R.transpose());
}

double scalar_curvature(const MetricSample& s) { return (s.g.inverse() * ricci(s)).trace(); }

Tensor3 christoffel(const MetricModel& model, const Vec3& x) { return christoffel(model.evaluate(x, 1)); }
Mat3 ricci(const MetricModel& model, const Vec3& x) { return ricci(model.evaluate(x, 2)); }
double scalar_curvature(const MetricModel& model, const Vec3& x) {
  return scalar_curvature(model.evaluate(x, 2));
}

// --- extrinsic curvature fields ---------------------------------------------

namespace {

class ZeroExtrinsic final : public ExtrinsicField {
 public:
  KbarSample evaluate(const Vec3&) const override {
    KbarSample s;
    s.dk = zero3();
    return s;
  }
  bool identically_zero() const override { return true; }
  std::string kind() const override { return "zero"; }
};

class SyntheticExtrinsic final : public ExtrinsicField {
 public:
  SyntheticExtrinsic(double delta, double B, const Vec3& b, const Vec3& origin)
      : delta_(delta), B_(B), b_(b), origin_(origin) {}

  KbarSample evaluate(const Vec3& xin) const override {
    const Vec3 x = xin - origin_;
    const double r = x.norm();
    const double s = -(2.0 + delta_);
    const double rs = std::pow(r, s);
    const Mat3 sym = b_ * x.transpose() + x * b_.transpose();
    KbarSample out;
    out.k = B_ * rs * sym;
    for (int l = 0; l < 3; ++l) {
      const Vec3 el = Vec3::Unit(l);
      out.dk[l] = B_ * (s * rs / (r * r) * x[l] * sym + rs * (b_ * el.transpose() + el * b_.transpose()));
    }
    return out;
  }
  bool identically_zero() const override { return B_ == 0.0; }
  std::string kind() const override { return "synthetic"; }

 private:
  double delta_, B_;
  Vec3 b_, origin_;
};

class ArtificialExtrinsic final : public ExtrinsicField {
 public:
  ArtificialExtrinsic(MetricPtr target, double scale)
      : target_(std::move(target)), ref_(target_->reference()), scale_(scale) {}

  KbarSample evaluate(const Vec3& x) const override {
    const MetricSample a = ref_->evaluate(x, 1);
    const MetricSample b = target_->evaluate(x, 1);
    KbarSample out;
    out.k = scale_ * (a.g - b.g);
    for (int l = 0; l < 3; ++l) out.dk[l] = scale_ * (a.dg[l] - b.dg[l]);
    return out;
  }
  std::string kind() const override { return "artificial"; }

 private:
  MetricPtr target_, ref_;
  double scale_;
};

class PureTraceExtrinsic final : public ExtrinsicField {
 public:
  PureTraceExtrinsic(MetricPtr base, double c) : base_(std::move(base)), c_(c) {}

  KbarSample evaluate(const Vec3& x) const override {
    const MetricSample s = base_->evaluate(x, 1);
    KbarSample out;
    out.k = c_ * s.g;
    for (int l = 0; l < 3; ++l) out.dk[l] = c_ * s.dg[l];
    return out;
  }
  bool identically_zero() const override { return c_ == 0.0; }
  std::string kind() const override { return "trace"; }

 private:
  MetricPtr base_;
  double c_;
};

}  // namespace

ExtrinsicPtr zero_extrinsic() { return std::make_shared<ZeroExtrinsic>(); }

ExtrinsicPtr synthetic_extrinsic(double delta, double B, const Vec3& b, const Vec3& origin) {
  if (!(delta > 0.0 && delta <= 1.0))
    fail(ErrorKind::model, "synthetic data: delta must lie in (0, 1], got " + std::to_string(delta));
  if (std::abs(b.norm() - 1.0) > 1e-12) fail(ErrorKind::model, "synthetic data: direction b must be a unit vector");
  return std::make_shared<SyntheticExtrinsic>(delta, B, b, origin);
}

ExtrinsicPtr artificial_extrinsic(MetricPtr target, double scale) {
  return std::make_shared<ArtificialExtrinsic>(std::move(target), scale);
}

ExtrinsicPtr pure_trace_extrinsic(MetricPtr base, double c) {
  return std::make_shared<PureTraceExtrinsic>(std::move(base), c);
}

InitialDataModel::InitialDataModel(MetricPtr base, ExtrinsicPtr kbar, LapseKind lapse, double delta)
    : base_(std::move(base)), kbar_(std::move(kbar)), lapse_(lapse), delta_(delta) {
  if (!base_) fail(ErrorKind::model, "initial data: null base model");
  if (!kbar_) kbar_ = zero_extrinsic();
}

KbarSample InitialDataModel::kbar(const Vec3& x) const {
  if (!base_->in_domain(x)) base_->evaluate(x, 0);  // raises the domain error
  return kbar_->evaluate(x);
}

Jet InitialDataModel::lapse(const Vec3& x) const {
  if (lapse_ == LapseKind::unit) {
    Jet j;
    j.v = 1.0;
    return j;
  }
  return schwarzschild_lapse(base_->mass(), x - base_->origin());
}

DataPtr time_symmetric_data(MetricPtr base) {
  return std::make_shared<InitialDataModel>(std::move(base), zero_extrinsic(), LapseKind::schwarzschild);
}

DataPtr synthetic_data(MetricPtr base, double delta, double B, const Vec3& b) {
  auto k = synthetic_extrinsic(delta, B, b, base->origin());
  return std::make_shared<InitialDataModel>(std::move(base), std::move(k), LapseKind::schwarzschild, delta);
}

DataPtr artificial_data(MetricPtr target, double tau, double scale) {
  auto k = artificial_extrinsic(target, scale);
  const double delta = std::min(1.0, target->decay().epsilon);
  return std::make_shared<InitialDataModel>(interpolated(target, tau), std::move(k), LapseKind::unit, delta);
}

Vec3 momentum_density(const InitialDataModel& data, const Vec3& x) {
  const MetricSample s = data.base().evaluate(x, 1);
  const KbarSample k = data.kbar(x);
  const Mat3 gi = s.g.inverse();
  const Tensor3 G = christoffel(s);
  Vec3 J;
  for (int j = 0; j < 3; ++j) {
    const Mat3 dgi = -gi * s.dg[j] * gi;
    const double dH = (dgi.cwiseProduct(k.k)).sum() + (gi.cwiseProduct(k.dk[j])).sum();
    double div = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int l = 0; l < 3; ++l) {
        double cov = k.dk[l](i, j);
        for (int p = 0; p < 3; ++p) cov -= G[p](l, i) * k.k(p, j) + G[p](l, j) * k.k(i, p);
        div += gi(i, l) * cov;
      }
    }
    J[j] = dH - div;
  }
  return J;
}

double energy_density(const InitialDataModel& data, const Vec3& x) {
  const MetricSample s = data.base().evaluate(x, 2);
  const KbarSample k = data.kbar(x);
  const Mat3 gi = s.g.inverse();
  const double S = scalar_curvature(s);
  const Mat3 ku = gi * k.k;  // mixed
  const double H = ku.trace();
  const double k2 = (ku * ku).trace();
  return 0.5 * (S - k2 + H * H);
}

// --- decay ------------------------------------------------------------------

namespace {

std::vector<Vec3> fibonacci_directions(int n) {
  std::vector<Vec3> out;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double rr = std::sqrt(1.0 - z * z);
    out.emplace_back(rr * std::cos(golden * i), rr * std::sin(golden * i), z);
  }
  return out;
}

double max_abs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

void finish(DecayReport& rep, const DecayClass& decay) {
  std::vector<double> r0, s0;
  for (const auto& row : rep.rows) {
    rep.max_constant = std::max(rep.max_constant, row.constant);
    if (row.order == 0 && row.quantity == rep.rows.front().quantity) {
      r0.push_back(row.radius);
      s0.push_back(row.sup);
    }
  }
  const auto fit = fit_power_law(r0, s0);
  rep.fitted_exponent = fit.ok ? fit.exponent : 0.0;
  // Growth check per (quantity, order): compare last to first radius.
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rep.rows.size(); ++j) {
      const auto& a = rep.rows[i];
      const auto& b = rep.rows[j];
      if (a.quantity == b.quantity && a.order == b.order && b.radius > a.radius &&
          b.constant > 1.5 * a.constant + 1e-14)
        rep.growing = true;
    }
  }
  rep.pass = !rep.growing && (decay.cbar <= 0.0 || rep.max_constant <= decay.cbar * (1.0 + 1e-9));
}

}  // namespace

DecayReport verify_decay(const MetricModel& model, const DecayClass& decay, const std::vector<double>& radii,
                         int directions) {
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) fail(ErrorKind::configuration, "verify_decay: radii must be increasing");
  const auto ref = model.reference();
  const auto dirs = fibonacci_directions(directions);
  const int kmax = std::min(decay.order, 2);
  DecayReport rep;
  for (double r : radii) {
    double sup[3] = {0, 0, 0};
    for (const auto& n : dirs) {
      const Vec3 x = model.origin() + r * n;
      const MetricSample a = model.evaluate(x, kmax);
      const MetricSample b = ref->evaluate(x, kmax);
      sup[0] = std::max(sup[0], max_abs(a.g - b.g));
      for (int k = 0; k < 3 && kmax >= 1; ++k) {
        sup[1] = std::max(sup[1], max_abs(a.dg[k] - b.dg[k]));
        for (int l = 0; l < 3 && kmax >= 2; ++l) sup[2] = std::max(sup[2], max_abs(a.ddg[k][l] - b.ddg[k][l]));
      }
    }
    for (int o = 0; o <= kmax; ++o)
      rep.rows.push_back({"g", o, r, sup[o], std::pow(r, 1.0 + o + decay.epsilon) * sup[o]});
  }
  finish(rep, decay);
  return rep;
}

DecayReport verify_decay(const InitialDataModel& data, const DecayClass& decay, const std::vector<double>& radii,
                         int directions) {
  DecayReport rep = verify_decay(data.base(), decay, radii, directions);
  const auto& model = data.base();
  const auto dirs = fibonacci_directions(directions);
  const double m = model.mass();
  for (double r : radii) {
    double sk[2] = {0, 0}, sa[2] = {0, 0};
    for (const auto& n : dirs) {
      const Vec3 x = model.origin() + r * n;
      const KbarSample k = data.kbar(x);
      sk[0] = std::max(sk[0], max_abs(k.k));
      for (int l = 0; l < 3; ++l) sk[1] = std::max(sk[1], max_abs(k.dk[l]));
      const Jet a = data.lapse(x);
      const Jet as = schwarzschild_lapse(m, x - model.origin());
      sa[0] = std::max(sa[0], std::abs(a.v - as.v));
      sa[1] = std::max(sa[1], (a.d - as.d).cwiseAbs().maxCoeff());
    }
    for (int o = 0; o < 2; ++o) {
      rep.rows.push_back({"kbar", o, r, sk[o], std::pow(r, 1.0 + o + decay.delta) * sk[o]});
      rep.rows.push_back(
          {"alpha", o, r, sa[o], std::pow(r, 1.0 + o + decay.epsilon - decay.delta) * sa[o]});
    }
  }
  finish(rep, decay);
  return rep;
}

}  // namespace cmclab
