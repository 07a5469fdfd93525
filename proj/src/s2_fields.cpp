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

#include "cmclab/s2_fields.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "cmclab/errors.hpp"

namespace cmclab {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes on [-1, 1] in decreasing order with weights.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = z;
        p0 = 1.0;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Final derivative at the converged node.
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

// Normalized associated Legendre functions at colatitude theta (values and
// the first two theta derivatives), triangular storage.
void legendre_table(int L, double theta, double* p, double* dp, double* ddp) {
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  auto T = [](int l, int m) { return SphericalGrid::tri(l, m); };
  p[0] = 1.0 / std::sqrt(4.0 * kPi);
  for (int m = 1; m <= L; ++m)
    p[T(m, m)] = std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * st * p[T(m - 1, m - 1)];
  for (int m = 0; m < L; ++m)
    p[T(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * ct * p[T(m, m)];
  for (int m = 0; m <= L; ++m) {
    for (int l = m + 2; l <= L; ++l) {
      double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
      double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) /
                           (4.0 * (l - 1) * (l - 1) - 1.0));
      p[T(l, m)] = a * (ct * p[T(l - 1, m)] - b * p[T(l - 2, m)]);
    }
  }
  if (!dp) return;
  const double inv_st = 1.0 / st;
  for (int l = 0; l <= L; ++l) {
    for (int m = 0; m <= l; ++m) {
      double v = l * ct * p[T(l, m)];
      if (l > m) {
        v -= std::sqrt((2.0 * l + 1.0) * (double(l) * l - double(m) * m) / (2.0 * l - 1.0)) *
             p[T(l - 1, m)];
      }
      dp[T(l, m)] = v * inv_st;
      if (ddp) {
        ddp[T(l, m)] = -ct * inv_st * dp[T(l, m)] -
                       (l * (l + 1.0) - m * m * inv_st * inv_st) * p[T(l, m)];
      }
    }
  }
}

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::model: return "model";
    case ErrorKind::domain: return "domain";
    case ErrorKind::grid_mismatch: return "grid_mismatch";
    case ErrorKind::solver: return "solver";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::solvability: return "solvability";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

SphericalGrid::SphericalGrid(int band_limit) : L_(band_limit) {
  if (band_limit < 4) fail(ErrorKind::configuration, "band limit must be >= 4, got " + std::to_string(band_limit));
  const int R = num_rings(), K = num_longitudes(), N = size();
  std::vector<double> x, w;
  gauss_legendre(R, x, w);
  theta_.resize(R);
  sin_theta_.resize(R);
  for (int j = 0; j < R; ++j) {
    theta_[j] = std::acos(x[j]);
    sin_theta_[j] = std::sqrt((1.0 - x[j]) * (1.0 + x[j]));
  }
  phi_.resize(K);
  for (int k = 0; k < K; ++k) phi_[k] = 2.0 * kPi * k / K;

  node_weight_.resize(N);
  direction_.resize(N);
  e_theta_.resize(N);
  e_phi_.resize(N);
  for (int j = 0; j < R; ++j) {
    const double ct = x[j], st = sin_theta_[j];
    for (int k = 0; k < K; ++k) {
      const int n = j * K + k;
      const double cp = std::cos(phi_[k]), sp = std::sin(phi_[k]);
      node_weight_[n] = w[j] * 2.0 * kPi / K;
      direction_[n] = Vec3(st * cp, st * sp, ct);
      e_theta_[n] = Vec3(ct * cp, ct * sp, -st);
      e_phi_[n] = Vec3(-sp, cp, 0.0);
    }
  }

  const int TS = tri_size();
  for (auto& v : legendre_) v.assign(std::size_t(R) * TS, 0.0);
  for (int j = 0; j < R; ++j) {
    legendre_table(L_, theta_[j], &legendre_[0][j * TS], &legendre_[1][j * TS],
                   &legendre_[2][j * TS]);
  }
  cos_.resize(std::size_t(L_ + 1) * K);
  sin_.resize(std::size_t(L_ + 1) * K);
  for (int m = 0; m <= L_; ++m) {
    for (int k = 0; k < K; ++k) {
      cos_[m * K + k] = std::cos(m * phi_[k]);
      sin_[m * K + k] = std::sin(m * phi_[k]);
    }
  }
}

std::shared_ptr<const SphericalGrid> SphericalGrid::shared(int band_limit) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const SphericalGrid>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(band_limit);
  if (it != cache.end()) return it->second;
  auto grid = std::make_shared<const SphericalGrid>(band_limit);
  cache.emplace(band_limit, grid);
  return grid;
}

void SphericalGrid::build_basis() const {
  std::call_once(basis_once_, [this] {
    const int N = size(), B = num_coeffs(), K = num_longitudes();
    basis_.resize(N, B);
    basis_dtheta_.resize(N, B);
    basis_dphi_.resize(N, B);
    const double s2 = std::sqrt(2.0);
    for (int n = 0; n < N; ++n) {
      const int j = n / K, k = n % K;
      const double inv_st = 1.0 / sin_theta_[j];
      for (int l = 0; l <= L_; ++l) {
        basis_(n, index(l, 0)) = legendre(j, l, 0);
        basis_dtheta_(n, index(l, 0)) = legendre(j, l, 0, 1);
        basis_dphi_(n, index(l, 0)) = 0.0;
        for (int m = 1; m <= l; ++m) {
          const double P = s2 * legendre(j, l, m), dP = s2 * legendre(j, l, m, 1);
          const double c = cos_mphi(m, k), s = sin_mphi(m, k);
          basis_(n, index(l, m)) = P * c;
          basis_(n, index(l, -m)) = P * s;
          basis_dtheta_(n, index(l, m)) = dP * c;
          basis_dtheta_(n, index(l, -m)) = dP * s;
          basis_dphi_(n, index(l, m)) = -m * P * s * inv_st;
          basis_dphi_(n, index(l, -m)) = m * P * c * inv_st;
        }
      }
    }
  });
}

const Eigen::MatrixXd& SphericalGrid::basis() const {
  build_basis();
  return basis_;
}
const Eigen::MatrixXd& SphericalGrid::basis_dtheta() const {
  build_basis();
  return basis_dtheta_;
}
const Eigen::MatrixXd& SphericalGrid::basis_dphi() const {
  build_basis();
  return basis_dphi_;
}

ScalarField::ScalarField(GridPtr grid) : grid_(std::move(grid)) {
  values_ = Eigen::VectorXd::Zero(grid_->size());
}

ScalarField::ScalarField(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size()) fail(ErrorKind::grid_mismatch, "field size does not match grid");
}

SpectralCoeffs::SpectralCoeffs(GridPtr grid) : grid_(std::move(grid)) {
  c_ = Eigen::VectorXd::Zero(grid_->num_coeffs());
}

SpectralCoeffs::SpectralCoeffs(GridPtr grid, Eigen::VectorXd coeffs)
    : grid_(std::move(grid)), c_(std::move(coeffs)) {
  if (c_.size() != grid_->num_coeffs()) fail(ErrorKind::grid_mismatch, "coefficient count does not match grid");
}

void require_same_grid(const GridPtr& a, const GridPtr& b) {
  if (!a || !b) fail(ErrorKind::grid_mismatch, "field without grid");
  if (a != b && a->band_limit() != b->band_limit())
    fail(ErrorKind::grid_mismatch, "grid mismatch: L=" + std::to_string(a->band_limit()) +
                                       " vs L=" + std::to_string(b->band_limit()));
}

SpectralCoeffs analyze(const ScalarField& f) {
  const auto& g = *f.grid();
  const int L = g.band_limit(), R = g.num_rings(), K = g.num_longitudes();
  const double s2 = std::sqrt(2.0);
  SpectralCoeffs out(f.grid());
  auto& c = out.values();
  std::vector<double> a(std::size_t(R) * (L + 1)), b(std::size_t(R) * (L + 1));
  for (int j = 0; j < R; ++j) {
    const double* fr = f.values().data() + j * K;
    for (int m = 0; m <= L; ++m) {
      double sa = 0.0, sb = 0.0;
      for (int k = 0; k < K; ++k) {
        sa += fr[k] * g.cos_mphi(m, k);
        sb += fr[k] * g.sin_mphi(m, k);
      }
      a[j * (L + 1) + m] = sa * g.weight(j * K);
      b[j * (L + 1) + m] = sb * g.weight(j * K);
    }
  }
  for (int l = 0; l <= L; ++l) {
    for (int m = 0; m <= l; ++m) {
      double sa = 0.0, sb = 0.0;
      for (int j = 0; j < R; ++j) {
        const double P = g.legendre(j, l, m);
        sa += P * a[j * (L + 1) + m];
        sb += P * b[j * (L + 1) + m];
      }
      if (m == 0) {
        c[SphericalGrid::index(l, 0)] = sa;
      } else {
        c[SphericalGrid::index(l, m)] = s2 * sa;
        c[SphericalGrid::index(l, -m)] = s2 * sb;
      }
    }
  }
  return out;
}

NodalDerivatives synthesize_derivatives(const SpectralCoeffs& coeffs) {
  const auto& g = *coeffs.grid();
  const int L = g.band_limit(), R = g.num_rings(), K = g.num_longitudes(), N = g.size();
  const auto& c = coeffs.values();
  const double s2 = std::sqrt(2.0);
  NodalDerivatives d;
  for (auto* v : {&d.f, &d.f_t, &d.f_p, &d.f_tt, &d.f_tp, &d.f_pp}) *v = Eigen::VectorXd::Zero(N);
  // Per ring: Fourier amplitudes A_m (cos) and B_m (sin) for P, P', P''.
  std::vector<double> A[3], B[3];
  for (int o = 0; o < 3; ++o) {
    A[o].resize(L + 1);
    B[o].resize(L + 1);
  }
  for (int j = 0; j < R; ++j) {
    for (int o = 0; o < 3; ++o) {
      for (int m = 0; m <= L; ++m) {
        double sa = 0.0, sb = 0.0;
        for (int l = m; l <= L; ++l) {
          const double P = g.legendre(j, l, m, o);
          if (m == 0) {
            sa += P * c[SphericalGrid::index(l, 0)];
          } else {
            sa += s2 * P * c[SphericalGrid::index(l, m)];
            sb += s2 * P * c[SphericalGrid::index(l, -m)];
          }
        }
        A[o][m] = sa;
        B[o][m] = sb;
      }
    }
    for (int k = 0; k < K; ++k) {
      const int n = j * K + k;
      double f = 0, ft = 0, fp = 0, ftt = 0, ftp = 0, fpp = 0;
      for (int m = 0; m <= L; ++m) {
        const double cm = g.cos_mphi(m, k), sm = g.sin_mphi(m, k);
        f += A[0][m] * cm + B[0][m] * sm;
        ft += A[1][m] * cm + B[1][m] * sm;
        ftt += A[2][m] * cm + B[2][m] * sm;
        fp += m * (-A[0][m] * sm + B[0][m] * cm);
        ftp += m * (-A[1][m] * sm + B[1][m] * cm);
        fpp += -double(m) * m * (A[0][m] * cm + B[0][m] * sm);
      }
      d.f[n] = f;
      d.f_t[n] = ft;
      d.f_p[n] = fp;
      d.f_tt[n] = ftt;
      d.f_tp[n] = ftp;
      d.f_pp[n] = fpp;
    }
  }
  return d;
}

ScalarField synthesize(const SpectralCoeffs& coeffs) {
  const auto& g = *coeffs.grid();
  const int L = g.band_limit(), R = g.num_rings(), K = g.num_longitudes();
  const auto& c = coeffs.values();
  const double s2 = std::sqrt(2.0);
  ScalarField out(coeffs.grid());
  std::vector<double> A(L + 1), B(L + 1);
  for (int j = 0; j < R; ++j) {
    for (int m = 0; m <= L; ++m) {
      double sa = 0.0, sb = 0.0;
      for (int l = m; l <= L; ++l) {
        const double P = g.legendre(j, l, m);
        if (m == 0) {
          sa += P * c[SphericalGrid::index(l, 0)];
        } else {
          sa += s2 * P * c[SphericalGrid::index(l, m)];
          sb += s2 * P * c[SphericalGrid::index(l, -m)];
        }
      }
      A[m] = sa;
      B[m] = sb;
    }
    for (int k = 0; k < K; ++k) {
      double f = 0.0;
      for (int m = 0; m <= L; ++m) f += A[m] * g.cos_mphi(m, k) + B[m] * g.sin_mphi(m, k);
      out[j * K + k] = f;
    }
  }
  return out;
}

double evaluate(const SpectralCoeffs& coeffs, const Vec3& direction) {
  const int L = coeffs.grid()->band_limit();
  const Vec3 u = direction.normalized();
  const double theta = std::acos(std::clamp(u.z(), -1.0, 1.0));
  const double phi = std::atan2(u.y(), u.x());
  std::vector<double> p(std::size_t(L + 1) * (L + 2) / 2);
  legendre_table(L, theta, p.data(), nullptr, nullptr);
  const auto& c = coeffs.values();
  const double s2 = std::sqrt(2.0);
  double f = 0.0;
  for (int l = 0; l <= L; ++l) {
    f += p[SphericalGrid::tri(l, 0)] * c[SphericalGrid::index(l, 0)];
    for (int m = 1; m <= l; ++m) {
      const double P = s2 * p[SphericalGrid::tri(l, m)];
      f += P * (c[SphericalGrid::index(l, m)] * std::cos(m * phi) +
                c[SphericalGrid::index(l, -m)] * std::sin(m * phi));
    }
  }
  return f;
}

SpectralCoeffs resample(const SpectralCoeffs& c, GridPtr target) {
  SpectralCoeffs out(target);
  const int n = std::min<int>(c.values().size(), out.values().size());
  out.values().head(n) = c.values().head(n);
  return out;
}

double integrate(const ScalarField& f, const ScalarField* weight) {
  const auto& w = f.grid()->weights();
  if (!weight) return w.dot(f.values());
  require_same_grid(f.grid(), weight->grid());
  return (w.array() * f.values().array() * weight->values().array()).sum();
}

SpectralCoeffs sphere_laplacian(const SpectralCoeffs& c) {
  SpectralCoeffs out(c.grid());
  const int L = c.grid()->band_limit();
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m) out(l, m) = -double(l) * (l + 1) * c(l, m);
  return out;
}

VectorField tangential_gradient(const ScalarField& f) {
  const auto& g = *f.grid();
  const auto d = synthesize_derivatives(analyze(f));
  VectorField out(3, g.size());
  for (int n = 0; n < g.size(); ++n) {
    const double st = g.sin_colatitude(g.ring_of(n));
    out.col(n) = d.f_t[n] * g.e_theta(n) + (d.f_p[n] / st) * g.e_phi(n);
  }
  return out;
}

LowModes project_low_modes(const ScalarField& f) {
  const auto c = analyze(f);
  LowModes out;
  out.mean = c(0, 0) / std::sqrt(4.0 * kPi);
  if (c.grid()->band_limit() >= 1) {
    const double s = std::sqrt(3.0 / (4.0 * kPi));
    out.dipole = Vec3(s * c(1, 1), s * c(1, -1), s * c(1, 0));
  }
  return out;
}

double spectral_tail_fraction(const SpectralCoeffs& c, int lmin) {
  const auto& v = c.values();
  const double total = v.squaredNorm();
  if (total == 0.0) return 0.0;
  const int start = std::min<int>(lmin * lmin, v.size());
  return v.tail(v.size() - start).squaredNorm() / total;
}

double degree_energy_fraction(const SpectralCoeffs& c, int l) {
  const auto& v = c.values();
  const double total = v.squaredNorm();
  if (total == 0.0 || l > c.grid()->band_limit()) return 0.0;
  return v.segment(l * l, 2 * l + 1).squaredNorm() / total;
}

}  // namespace cmclab
