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

#include <memory>
#include <string>
#include <vector>

#include "cmclab/metric_models.hpp"
#include "cmclab/s2_fields.hpp"

namespace cmclab {

/// Radial graph x = c + rho(N) N about a center c, rho stored spectrally.
class SurfaceEmbedding {
 public:
  SurfaceEmbedding() = default;
  SurfaceEmbedding(Vec3 center, SpectralCoeffs rho);

  static SurfaceEmbedding round_sphere(GridPtr grid, const Vec3& center, double radius);

  const Vec3& center() const { return center_; }
  const SpectralCoeffs& rho() const { return rho_; }
  const GridPtr& grid() const { return rho_.grid(); }
  ScalarField rho_nodal() const { return synthesize(rho_); }
  Vec3 position(int node) const;

  SurfaceEmbedding translated(const Vec3& a) const { return {center_ + a, rho_}; }
  SurfaceEmbedding scaled(double factor) const;
  /// Same surface re-expressed as a graph about another center.
  SurfaceEmbedding recentered(const Vec3& new_center) const;
  /// Radial function of this surface seen from `center` in direction n.
  double radius_from(const Vec3& center, const Vec3& n) const;

  std::string to_json() const;
  static SurfaceEmbedding from_json(const std::string& text);

 private:
  Vec3 center_ = Vec3::Zero();
  SpectralCoeffs rho_;
};

enum class CenterMeasure { euclidean, induced };

/// Geometry of a surface inside a metric model, sampled at the grid nodes.
///
/// Tangent frame per node: X1 = d/dtheta, X2 = (1/sin theta) d/dphi of the
/// embedding. Frame-component arrays store the 2x2 symmetric tensors as
/// (11, 12, 22).
struct SurfaceGeometry {
  GridPtr grid;
  Vec3 center = Vec3::Zero();
  double mass = 0.0;

  Eigen::Matrix3Xd x, X1, X2;
  Eigen::Matrix3Xd nu;      ///< outward unit normal, vector components
  Eigen::Matrix3Xd nu_low;  ///< gbar(nu, .)
  std::vector<Mat3> gbar;

  Eigen::VectorXd G11, G12, G22, sqrtG;  ///< induced metric in the frame
  Eigen::VectorXd k11, k12, k22;         ///< second fundamental form in the frame
  Eigen::VectorXd H, k_sq, kring_norm, ric_nn;
  Eigen::VectorXd n_dot_nu;  ///< gbar(N, nu), N the radial direction
  Eigen::VectorXd dmu;       ///< quadrature weight times induced area density
  Eigen::VectorXd dH2;       ///< quadrature weight times Euclidean area density
  /// Christoffel symbols of the induced metric in (theta, phi) coordinates:
  /// Gamma^c_ab stored as gam[c](a, b).
  std::vector<std::array<Eigen::Matrix2d, 2>> gam;

  double area = 0.0;
  double euclidean_area = 0.0;
  double mean_H = 0.0;
  double sigma = 0.0;  ///< mean-curvature radius

  int size() const { return grid->size(); }
  double integrate(const Eigen::VectorXd& f) const { return dmu.dot(f); }
  double mean(const Eigen::VectorXd& f) const { return dmu.dot(f) / area; }
  /// Frame components of the inverse induced metric at a node.
  Eigen::Matrix2d G_inv(int n) const;
  Eigen::Matrix2d G(int n) const;
};

SurfaceGeometry compute_geometry(const SurfaceEmbedding& surface, const MetricModel& model);

/// Mean-curvature radius: solves H = -2/sigma + 4m/sigma^2 for sigma.
double mean_curvature_radius(double H, double m);

/// Weak-form (Galerkin) discretization of L f = Lap f + (|k|^2 + Ric(nu,nu)) f on
/// the spherical-harmonic basis: A = -K + V with stiffness K and potential
/// V, mass matrix M (all with respect to the induced measure).
struct StabilityOperator {
  Eigen::MatrixXd A;
  Eigen::MatrixXd M;
  Eigen::MatrixXd K;

  static StabilityOperator assemble(const SurfaceGeometry& geom, bool with_mass = true);
};

/// Coefficients of the L2(dmu) projection onto degree <= L of a nodal field.
Eigen::VectorXd project(const SurfaceGeometry& geom, const StabilityOperator& op, const Eigen::VectorXd& f);
/// Weak right-hand side b_p = int Y_p f dmu.
Eigen::VectorXd weak_rhs(const SurfaceGeometry& geom, const Eigen::VectorXd& f);

struct OperatorApplyResult {
  ScalarField Lf;
  double tail_fraction = 0.0;  ///< energy of the projected result above degree 3L/4
  bool resolution_warning = false;
};

OperatorApplyResult stability_operator_apply(const SurfaceGeometry& geom, const ScalarField& f);

struct Eigenpair {
  double lambda = 0.0;  ///< eigenvalue of -L
  ScalarField field;
  double degree1_fraction = 0.0;
};

/// The n eigenpairs of -L of smallest |lambda|, L2(dmu)-orthonormal.
std::vector<Eigenpair> low_eigenpairs(const SurfaceGeometry& geom, int n);
std::vector<Eigenpair> low_eigenpairs(const SurfaceGeometry& geom, const StabilityOperator& op, int n);

/// Scale-invariant Sobolev norm of a scalar field, k in {0,1,2},
/// p in {1, 2, inf} (inf as std::numeric_limits<double>::infinity()).
double sobolev_norm(const SurfaceGeometry& geom, const ScalarField& f, int k, double p, double sigma = 0.0);
/// L^p norm of the trace-free second fundamental form.
double kring_lp_norm(const SurfaceGeometry& geom, double p);

/// Area-normalized coordinate centroid with the Euclidean-induced measure.
Vec3 euclidean_center(const SurfaceEmbedding& surface);
Vec3 euclidean_center(const SurfaceGeometry& geom, CenterMeasure measure = CenterMeasure::euclidean);

}  // namespace cmclab
