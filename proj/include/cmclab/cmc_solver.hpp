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

#include <optional>
#include <string>
#include <vector>

#include "cmclab/surface_geometry.hpp"

namespace cmclab {

struct SolverConfig {
  int band_limit = 32;
  double newton_tol = 1e-10;  ///< on sup|H - H_sigma| * sigma^2
  int max_newton = 30;
  double recenter_threshold = 0.1;  ///< fraction of sigma
  double sigma_floor_factor = 8.0;  ///< floor = factor * m
  int eigen_count = 3;              ///< 0 disables the eigen diagnostic
};

struct LeafDiagnostics {
  int iterations = 0;
  double residual = 0.0;
  Vec3 center = Vec3::Zero();
  double area_radius = 0.0;
  double kring_sup = 0.0;
  double rcond = 0.0;
  int recenterings = 0;
  std::vector<double> eigenvalues;  ///< of -L, smallest |lambda| first
  std::vector<double> residual_history;
};

struct Leaf {
  double sigma = 0.0;
  double H_target = 0.0;
  SurfaceEmbedding surface;
  SurfaceGeometry geometry;
  LeafDiagnostics diag;
};

struct FoliationResult {
  std::vector<Leaf> leaves;
  bool complete = true;
  std::string failure;      ///< message of the first failing leaf
  double failed_sigma = 0;  ///< sigma of the failing leaf
  bool nested = true;
};

double target_mean_curvature(double sigma, double m);

/// Coordinate radius r of the centered sphere with mean curvature H_sigma in
/// Schwarzschild of mass m (Euclidean for m = 0), by bisection.
double schwarzschild_leaf_radius(double sigma, double m);

struct NewtonStep {
  SurfaceEmbedding surface;
  double residual_before = 0.0;
  double residual_after = 0.0;
  double rcond = 0.0;
  double update_norm = 0.0;  ///< sup |delta rho|
};

/// One Newton step towards H == H_target; residuals are scaled by sigma^2.
NewtonStep newton_step(const SurfaceEmbedding& surface, const MetricModel& model, double H_target,
                       double sigma);

Leaf solve_cmc(const MetricModel& model, double sigma, const SolverConfig& config,
               const std::optional<SurfaceEmbedding>& initial = std::nullopt);

FoliationResult solve_foliation(const MetricModel& model, const std::vector<double>& sigmas,
                                const SolverConfig& config);

/// rho_b > rho_a pointwise after expressing b about a's center.
bool leaves_nested(const SurfaceEmbedding& inner, const SurfaceEmbedding& outer);

struct RadialLapse {
  ScalarField u;
  double deviation_sup = 0.0;  ///< sup |u - (1 + m/sigma)|
  double w1inf = 0.0;          ///< ||u - 1||_{W^{1,inf}}
  double rcond = 0.0;
};

/// Solves L u = d/dsigma H_sigma on the leaf.
RadialLapse solve_radial_lapse(const Leaf& leaf, const MetricModel& model);

/// Solves A c = b for the weak-form operator; falls back to a rank-revealing
/// solve when the LU is near singular.
Eigen::VectorXd solve_weak(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double* rcond = nullptr);

}  // namespace cmclab
