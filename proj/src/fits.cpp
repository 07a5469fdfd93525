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

#include "cmclab/fits.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "cmclab/errors.hpp"

namespace cmclab {

PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  PowerFit out;
  if (x.size() != y.size()) fail(ErrorKind::configuration, "fit: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && std::abs(y[i]) > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(std::abs(y[i])));
    }
  }
  out.points = static_cast<int>(lx.size());
  if (out.points < 2) return out;
  const double n = out.points;
  double mx = 0, my = 0;
  for (int i = 0; i < out.points; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < out.points; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) return out;
  const double slope = sxy / sxx;
  const double icpt = my - slope * mx;
  double ss = 0;
  for (int i = 0; i < out.points; ++i) {
    const double r = ly[i] - (icpt + slope * lx[i]);
    ss += r * r;
  }
  out.exponent = -slope;
  out.prefactor = std::exp(icpt);
  out.residual = std::sqrt(ss / n);
  out.ok = true;
  return out;
}

double richardson_limit(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  if (n == 0 || y.size() != x.size()) fail(ErrorKind::configuration, "extrapolation: bad samples");
  // Scale x so the Vandermonde-type system stays well conditioned.
  const double x0 = x.front();
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const double t = x0 / x[i];
    double p = 1.0;
    for (int k = 0; k < n; ++k) {
      A(i, k) = p;
      p *= t;
    }
    b[i] = y[i];
  }
  return A.fullPivLu().solve(b)[0];
}

}  // namespace cmclab
