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

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace cmclab {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Gauss-Legendre (colatitude) x equispaced (longitude) grid on the unit
/// sphere together with the real orthonormal spherical harmonic basis up to
/// degree L.
///
/// Basis ordering: index(l, m) = l*l + l + m for |m| <= l. For m > 0 the
/// function is sqrt(2) Pbar_lm(cos t) cos(m p), for m < 0 it is
/// sqrt(2) Pbar_l|m|(cos t) sin(|m| p); no Condon-Shortley phase, so
/// Y_{1,1}, Y_{1,-1}, Y_{1,0} are positive multiples of x, y, z.
///
/// Node ordering: node = ring * num_longitudes() + k, rings ordered by
/// increasing colatitude.
class SphericalGrid {
 public:
  explicit SphericalGrid(int band_limit);

  /// Shared, process-wide instance per band limit.
  static std::shared_ptr<const SphericalGrid> shared(int band_limit);

  int band_limit() const { return L_; }
  int num_rings() const { return L_ + 1; }
  int num_longitudes() const { return 2 * L_ + 2; }
  int size() const { return num_rings() * num_longitudes(); }
  int num_coeffs() const { return (L_ + 1) * (L_ + 1); }
  static int index(int l, int m) { return l * l + l + m; }

  int ring_of(int node) const { return node / num_longitudes(); }
  double colatitude(int ring) const { return theta_[ring]; }
  double longitude(int k) const { return phi_[k]; }
  double sin_colatitude(int ring) const { return sin_theta_[ring]; }
  /// Quadrature weight of a node; the weights sum to 4 pi.
  double weight(int node) const { return node_weight_[node]; }
  const Eigen::VectorXd& weights() const { return node_weight_; }

  const Vec3& direction(int node) const { return direction_[node]; }
  const Vec3& e_theta(int node) const { return e_theta_[node]; }
  const Vec3& e_phi(int node) const { return e_phi_[node]; }

  /// Normalized associated Legendre values and colatitude derivatives at a
  /// ring, for 0 <= m <= l <= L; order = 0, 1, 2.
  double legendre(int ring, int l, int m, int order = 0) const {
    return legendre_[order][ring * tri_size() + tri(l, m)];
  }
  double cos_mphi(int m, int k) const { return cos_[m * num_longitudes() + k]; }
  double sin_mphi(int m, int k) const { return sin_[m * num_longitudes() + k]; }

  /// Nodal basis matrices (size() x num_coeffs()): values, d/dtheta and
  /// (1/sin theta) d/dphi. Built on first use.
  const Eigen::MatrixXd& basis() const;
  const Eigen::MatrixXd& basis_dtheta() const;
  const Eigen::MatrixXd& basis_dphi() const;

  static int tri(int l, int m) { return l * (l + 1) / 2 + m; }
  int tri_size() const { return (L_ + 1) * (L_ + 2) / 2; }

 private:
  void build_basis() const;

  int L_;
  std::vector<double> theta_, sin_theta_, phi_;
  Eigen::VectorXd node_weight_;
  std::vector<Vec3> direction_, e_theta_, e_phi_;
  std::array<std::vector<double>, 3> legendre_;
  std::vector<double> cos_, sin_;

  mutable std::once_flag basis_once_;
  mutable Eigen::MatrixXd basis_, basis_dtheta_, basis_dphi_;
};

using GridPtr = std::shared_ptr<const SphericalGrid>;

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridPtr grid);
  ScalarField(GridPtr grid, Eigen::VectorXd values);

  const GridPtr& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  double operator[](int node) const { return values_[node]; }
  double& operator[](int node) { return values_[node]; }
  int size() const { return static_cast<int>(values_.size()); }

  template <class F>
  static ScalarField from_function(GridPtr grid, F&& f) {
    ScalarField out(grid);
    for (int n = 0; n < grid->size(); ++n) out[n] = f(grid->direction(n));
    return out;
  }

 private:
  GridPtr grid_;
  Eigen::VectorXd values_;
};

class SpectralCoeffs {
 public:
  SpectralCoeffs() = default;
  explicit SpectralCoeffs(GridPtr grid);
  SpectralCoeffs(GridPtr grid, Eigen::VectorXd coeffs);

  const GridPtr& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return c_; }
  Eigen::VectorXd& values() { return c_; }
  double operator()(int l, int m) const { return c_[SphericalGrid::index(l, m)]; }
  double& operator()(int l, int m) { return c_[SphericalGrid::index(l, m)]; }

 private:
  GridPtr grid_;
  Eigen::VectorXd c_;
};

/// Cartesian vector field sampled on the grid nodes (3 x size()).
using VectorField = Eigen::Matrix3Xd;

/// Nodal values of a band-limited function and its (theta, phi) coordinate
/// derivatives up to second order.
struct NodalDerivatives {
  Eigen::VectorXd f, f_t, f_p, f_tt, f_tp, f_pp;
};

SpectralCoeffs analyze(const ScalarField& f);
ScalarField synthesize(const SpectralCoeffs& c);
NodalDerivatives synthesize_derivatives(const SpectralCoeffs& c);

/// Evaluate the band-limited expansion at an arbitrary unit direction.
double evaluate(const SpectralCoeffs& c, const Vec3& direction);

/// Zero-pad or truncate coefficients onto another grid.
SpectralCoeffs resample(const SpectralCoeffs& c, GridPtr target);

/// Round-sphere quadrature of f (optionally times a weight field).
double integrate(const ScalarField& f, const ScalarField* weight = nullptr);

SpectralCoeffs sphere_laplacian(const SpectralCoeffs& c);
VectorField tangential_gradient(const ScalarField& f);

struct LowModes {
  double mean = 0.0;
  Vec3 dipole = Vec3::Zero();  ///< f_1 = dipole . N
};

/// Splits f = mean + dipole . N + remainder with the remainder L2-orthogonal
/// to all harmonics of degree <= 1.
LowModes project_low_modes(const ScalarField& f);

/// Fraction of the coefficient energy carried by degrees l >= lmin.
double spectral_tail_fraction(const SpectralCoeffs& c, int lmin);
/// Fraction of the coefficient energy carried by degree l.
double degree_energy_fraction(const SpectralCoeffs& c, int l);

void require_same_grid(const GridPtr& a, const GridPtr& b);

}  // namespace cmclab
