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

#include <string>
#include <vector>

#include "cmclab/cmc_solver.hpp"
#include "cmclab/fits.hpp"

namespace cmclab {

/// How the momentum flux and the J correction are combined into the
/// pseudo momentum that predicts the center velocity.
///   adm:     pseudo = -P + C  (P built from Pi = H gbar - kbar)
///   direct:  pseudo = +P + C
enum class MomentumConvention { adm, direct };

struct MomentumReport {
  double sigma = 0.0;
  Vec3 quasi_local = Vec3::Zero();  ///< (1/8pi) int Pi(nu, e_i), Pi = H gbar - kbar
  Vec3 correction = Vec3::Zero();   ///< (1/8pi) int sigma nu_i J(nu)
  Vec3 pseudo = Vec3::Zero();       ///< combination selected by the convention
  Vec3 pseudo_direct = Vec3::Zero();
  Vec3 pseudo_adm = Vec3::Zero();
  double flux_sup = 0.0;        ///< sup over nodes of |Pi(nu, .)|
  double correction_sup = 0.0;  ///< sup over nodes of |sigma J(nu)|
};

MomentumReport quasi_local_momentum(const SurfaceGeometry& geom, double sigma, const InitialDataModel& data,
                                    MomentumConvention convention = MomentumConvention::adm);

struct LapseRhs {
  Eigen::VectorXd coeffs;  ///< L2(dmu) projection onto degree <= L
  ScalarField field;
};

/// Right-hand side of the lapse equation L w = (...) on a leaf of data.base().
LapseRhs lapse_rhs(const SurfaceGeometry& geom, const StabilityOperator& op, const InitialDataModel& data);

/// Solves L w = rhs (rhs given by its projection coefficients).
ScalarField solve_lapse(const SurfaceGeometry& geom, const StabilityOperator& op, const Eigen::VectorXd& rhs_coeffs);
ScalarField solve_lapse(const SurfaceGeometry& geom, const StabilityOperator& op, const ScalarField& rhs);

/// 3 * mean over the leaf of nu_i w.
Vec3 center_velocity_from_lapse(const SurfaceGeometry& geom, const ScalarField& w,
                                CenterMeasure measure = CenterMeasure::induced);

struct EvolutionReport {
  double sigma = 0.0;
  ScalarField w;
  Vec3 velocity = Vec3::Zero();
  Vec3 prediction = Vec3::Zero();
  double residual = 0.0;
  double residual_direct = 0.0;  ///< residual against the direct combination
  MomentumReport momentum;
  double w_w1inf = 0.0;
  double w_l2 = 0.0;
  double rhs_sup = 0.0;
};

EvolutionReport evolution_residual(const Leaf& leaf, const InitialDataModel& data,
                                   MomentumConvention convention = MomentumConvention::adm,
                                   CenterMeasure measure = CenterMeasure::induced);

/// (1/16 pi m) ADM center integral over the Euclidean sphere S_rho(0).
Vec3 adm_center_integral(const MetricModel& model, double rho, int band_limit = 32);
inline Vec3 adm_center_from_leaf_formula(const MetricModel& model, double sigma, int band_limit = 32) {
  return adm_center_integral(model, sigma, band_limit);
}

struct ArtificialFlowResult {
  double sigma = 0.0;
  std::vector<double> tau;
  std::vector<Vec3> path;
  Vec3 endpoint = Vec3::Zero();
};

/// RK4 for dz/dtau = pseudo momentum / m on the Euclidean spheres S_sigma(z)
/// of the artificial slices.
ArtificialFlowResult artificial_flow_integrate(const MetricPtr& model, double sigma, int steps,
                                               int band_limit = 32, double kbar_scale = 0.5,
                                               MomentumConvention convention = MomentumConvention::adm);

struct CenterReport {
  std::vector<double> sigmas;
  std::vector<Vec3> cmc_centers;
  std::vector<Vec3> leaf_formula;  ///< ADM integrand at radius sigma
  std::vector<double> radii;
  std::vector<Vec3> adm_integrals;
  Vec3 adm_extrapolated = Vec3::Zero();
  bool adm_converges = false;
  PowerFit adm_increment_fit;  ///< decay of |z_ADM(2r) - z_ADM(r)|
  PowerFit gap_fit;            ///< decay of |z_CMC - leaf formula| over sigma
  PowerFit growth_fit;         ///< |z_CMC| ~ sigma^{-p}
  double final_gap = 0.0;      ///< |z_CMC(largest sigma) - z_ADM extrapolated|
};

CenterReport center_report(const MetricModel& model, const std::vector<double>& sigmas,
                           const std::vector<double>& radii, const SolverConfig& config);

}  // namespace cmclab
