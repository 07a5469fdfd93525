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

#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "cmclab/s2_fields.hpp"

namespace cmclab {

/// Rank-3 array indexed [k](i, j), used for first derivatives d_k T_ij and
/// for Christoffel symbols Gamma^k_ij.
using Tensor3 = std::array<Mat3, 3>;
/// Second derivatives d_k d_l T_ij stored as [k][l](i, j).
using Tensor4 = std::array<std::array<Mat3, 3>, 3>;

struct DecayClass {
  double epsilon = 1.0;
  double delta = 1.0;
  double cbar = 0.0;  ///< 0 means "not declared"
  int order = 2;
};

struct MetricSample {
  Mat3 g = Mat3::Identity();
  Tensor3 dg{};
  Tensor4 ddg{};
};

class MetricModel;
using MetricPtr = std::shared_ptr<const MetricModel>;

class MetricModel {
 public:
  virtual ~MetricModel() = default;

  const std::string& name() const { return name_; }
  double mass() const { return m_; }
  double r_min() const { return r_min_; }
  /// Point about which the model is asymptotically Schwarzschild.
  const Vec3& origin() const { return origin_; }
  const DecayClass& decay() const { return decay_; }

  /// Metric and derivatives up to `order` (0, 1 or 2). Throws a domain error
  /// inside the exclusion ball about origin().
  MetricSample evaluate(const Vec3& x, int order = 2) const;
  Mat3 metric(const Vec3& x) const { return evaluate(x, 0).g; }

  bool in_domain(const Vec3& x) const { return (x - origin_).norm() > r_min_; }

  /// Schwarzschild of the same mass about origin(); the Euclidean model for
  /// zero mass.
  virtual MetricPtr reference() const = 0;

 protected:
  MetricModel(std::string name, double m, double r_min, Vec3 origin, DecayClass decay)
      : name_(std::move(name)), m_(m), r_min_(r_min), origin_(std::move(origin)), decay_(decay) {}
  virtual MetricSample eval(const Vec3& x, int order) const = 0;

 private:
  std::string name_;
  double m_;
  double r_min_;
  Vec3 origin_;
  DecayClass decay_;
};

/// Scalar function with gradient and Hessian.
struct Jet {
  double v = 0.0;
  Vec3 d = Vec3::Zero();
  Mat3 dd = Mat3::Zero();
};

MetricPtr euclidean();
MetricPtr schwarzschild(double m);
MetricPtr perturbed_schwarzschild(double m, double epsilon, double amplitude, const std::string& shape);
MetricPtr translated(MetricPtr base, const Vec3& a);
MetricPtr interpolated(MetricPtr base, double tau);

/// Schwarzschild conformal factor phi^4 with phi = 1 + m / (2 r).
Jet schwarzschild_factor(double m, const Vec3& x);
/// Schwarzschild lapse (1 - 2m/r) / (1 + 2m/r).
Jet schwarzschild_lapse(double m, const Vec3& x);

// Curvature of the ambient metric.
Tensor3 christoffel(const MetricSample& s);
Mat3 ricci(const MetricSample& s);
double scalar_curvature(const MetricSample& s);
Tensor3 christoffel(const MetricModel& model, const Vec3& x);
Mat3 ricci(const MetricModel& model, const Vec3& x);
double scalar_curvature(const MetricModel& model, const Vec3& x);

// --- initial data ---------------------------------------------------------

struct KbarSample {
  Mat3 k = Mat3::Zero();
  Tensor3 dk{};  ///< [l](i, j) = d_l kbar_ij
};

class ExtrinsicField {
 public:
  virtual ~ExtrinsicField() = default;
  virtual KbarSample evaluate(const Vec3& x) const = 0;
  virtual bool identically_zero() const { return false; }
  virtual std::string kind() const = 0;
};
using ExtrinsicPtr = std::shared_ptr<const ExtrinsicField>;

ExtrinsicPtr zero_extrinsic();
/// kbar_ij = B r^{-(1+delta)} (b_i x_j + b_j x_i) / r, x relative to origin.
ExtrinsicPtr synthetic_extrinsic(double delta, double B, const Vec3& b, const Vec3& origin);
/// kbar = scale * (g_ref - g) for the target model g and its reference.
ExtrinsicPtr artificial_extrinsic(MetricPtr target, double scale);
/// kbar = c * gbar.
ExtrinsicPtr pure_trace_extrinsic(MetricPtr base, double c);

enum class LapseKind { schwarzschild, unit };

class InitialDataModel {
 public:
  InitialDataModel(MetricPtr base, ExtrinsicPtr kbar, LapseKind lapse, double delta = 1.0);

  const MetricModel& base() const { return *base_; }
  const MetricPtr& base_ptr() const { return base_; }
  const ExtrinsicField& extrinsic() const { return *kbar_; }
  LapseKind lapse_kind() const { return lapse_; }
  double delta() const { return delta_; }
  bool time_symmetric() const { return kbar_->identically_zero(); }

  KbarSample kbar(const Vec3& x) const;
  Jet lapse(const Vec3& x) const;

 private:
  MetricPtr base_;
  ExtrinsicPtr kbar_;
  LapseKind lapse_;
  double delta_;
};
using DataPtr = std::shared_ptr<const InitialDataModel>;

DataPtr time_symmetric_data(MetricPtr base);
DataPtr synthetic_data(MetricPtr base, double delta, double B, const Vec3& b);
/// Slice tau of the artificial spacetime: metric g_S + tau (g - g_S),
/// kbar = scale (g_S - g), unit lapse.
DataPtr artificial_data(MetricPtr target, double tau, double scale = 0.5);

/// J_j = div(H gbar - kbar)_j.
Vec3 momentum_density(const InitialDataModel& data, const Vec3& x);
/// rho = (S - |kbar|^2 + H^2) / 2.
double energy_density(const InitialDataModel& data, const Vec3& x);

// --- decay validation ------------------------------------------------------

struct DecayRow {
  std::string quantity;  ///< "g", "kbar" or "alpha"
  int order = 0;
  double radius = 0.0;
  double sup = 0.0;       ///< sup over directions of |d^gamma(...)|
  double constant = 0.0;  ///< r^{expected exponent} * sup
};

struct DecayReport {
  std::vector<DecayRow> rows;
  /// Fitted decay exponent of the order-0 metric deviation (sup ~ r^-p).
  double fitted_exponent = 0.0;
  double max_constant = 0.0;
  bool growing = false;
  bool pass = true;
};

DecayReport verify_decay(const MetricModel& model, const DecayClass& decay,
                         const std::vector<double>& radii, int directions = 64);
DecayReport verify_decay(const InitialDataModel& data, const DecayClass& decay,
                         const std::vector<double>& radii, int directions = 64);

}  // namespace cmclab
