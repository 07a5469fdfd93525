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

// Reference computations that avoid the spectral machinery they are used to
// check: scalar root finding, finite differences and plain product-rule
// quadrature.

#include "cmclab/cmc_solver.hpp"
#include "cmclab/physics.hpp"

namespace cmclab::oracles {

/// Root of phi^-2 (2/r - 2m/(r^2 phi)) = 2/sigma - 4m/sigma^2 by bisection.
double schwarzschild_radius(double sigma, double m);

/// Mean curvature of the coordinate sphere |x| = r in Schwarzschild.
double schwarzschild_sphere_H(double r, double m);

/// The slice metric advanced by h along the data: g - 2 h alpha kbar
/// (second derivatives are those of g).
MetricPtr evolved_metric(const DataPtr& data, double h);

/// -dH/dt of a fixed surface under g -> g - 2 t alpha kbar, central differences.
Eigen::VectorXd fd_lapse_rhs(const SurfaceEmbedding& surface, const DataPtr& data, double h);

/// Center velocity of the leaf: solves the leaf in the metrics advanced by +-h.
Vec3 fd_leaf_velocity(const DataPtr& data, double sigma, double h, const SolverConfig& config);

/// ADM center integral over S_rho(0) by midpoint quadrature (nt x 2nt) with
/// metric derivatives from central differences.
Vec3 adm_center_midpoint(const MetricModel& model, double rho, int nt = 96);

/// Centroid of rho(N) N with the Euclidean area element, by midpoint
/// quadrature on an nt x 2nt grid.
Vec3 euclidean_center_midpoint(const SurfaceEmbedding& surface, int nt = 256);

/// (1/8pi) int Pi(nu, e_i) dmu on a leaf resampled to a finer band limit.
Vec3 momentum_flux_refined(const SurfaceEmbedding& surface, const InitialDataModel& data, int band_limit);

struct LinearizationCheck {
  std::vector<double> h;
  std::vector<double> error;  ///< sup |(H(h) - H(0))/h - L u|, scaled by sigma^2
  double order = 0.0;
};

/// Compares the mean curvature change of rho -> rho + h u / <N, nu> with L u.
LinearizationCheck linearization_check(const SurfaceEmbedding& surface, const MetricModel& model,
                                       const ScalarField& u, const std::vector<double>& h);

}  // namespace cmclab::oracles
