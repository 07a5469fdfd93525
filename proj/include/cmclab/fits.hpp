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

#include <vector>

namespace cmclab {

/// Least-squares fit of log|y| = log C - p log x.
struct PowerFit {
  double exponent = 0.0;  ///< p in |y| ~ C x^{-p}
  double prefactor = 0.0;
  double residual = 0.0;  ///< RMS of the log residuals
  int points = 0;
  bool ok = false;
};

PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

/// Fits are only trusted below this RMS log residual.
inline constexpr double kFitResidualGate = 0.1;

/// Richardson extrapolation of samples y(x) assuming y = y_inf + sum_k c_k x^-k
/// for k = 1 .. n-1 (n = number of samples).
double richardson_limit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cmclab
