// Copyright 2026 The Hypertune Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Kernel density estimation via diffusion: samples are binned onto a cosine
// grid, the plug-in bandwidth t* is the fixed point of the standard
// seven-stage functional, and the density is the cosine series smoothed by
// exp(-k^2 pi^2 t*/2) under reflective boundary conditions.

#ifndef HYPERTUNE_KDE_HPP_
#define HYPERTUNE_KDE_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace hypertune {

template <typename Scalar = double>
struct DensityEstimate {
  Eigen::Vector<Scalar, Eigen::Dynamic> mesh;     // m points spanning [lo, hi]
  Eigen::Vector<Scalar, Eigen::Dynamic> density;  // non-negative, integrates to 1
  Scalar bandwidth_t = 0;                         // selected squared bandwidth t*
  int sample_count = 0;
  bool fallback_bandwidth = false;  // fixed point failed; Silverman rule used
  bool bandwidth_floored = false;   // t* raised to the mesh-resolution floor
};

namespace kde_detail {

inline int next_pow2_at_least_64(int request) {
  int m = 64;
  while (m < request) m *= 2;
  return m;
}

// One evaluation of the fixed-point functional t - xi * gamma^[7](t).
// Returns NaN when an intermediate functional value is non-finite or
// non-positive (the caller treats that as "no root here").
inline double fixed_point_residual(double t, double N, const std::vector<double>& a2) {
  constexpr double pi = 3.14159265358979323846;
  const int ell = 7;
  const size_t K = a2.size();  // coefficients k = 1..K

  auto stage_sum = [&](int s, double time) {
    double sum = 0.0;
    for (size_t i = 0; i < K; ++i) {
      const double k2 = double(i + 1) * double(i + 1);
      sum += std::pow(k2, s) * a2[i] * std::exp(-k2 * pi * pi * time);
    }
    return 2.0 * std::pow(pi, 2 * s) * sum;
  };

  double f = stage_sum(ell, t);
  for (int s = ell - 1; s >= 2; --s) {
    if (!std::isfinite(f) || f <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    double odd_factorial = 1.0;  // (2s - 1)!!
    for (int j = 3; j <= 2 * s - 1; j += 2) odd_factorial *= j;
    const double K0 = odd_factorial / std::sqrt(2.0 * pi);
    const double c = (1.0 + std::pow(0.5, s + 0.5)) / 3.0;
    const double time = std::pow(2.0 * c * K0 / (N * f), 2.0 / (3.0 + 2.0 * s));
    f = stage_sum(s, time);
  }
  if (!std::isfinite(f) || f <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return t - std::pow(2.0 * N * std::sqrt(pi) * f, -0.4);
}

// Expanding-bracket bisection for the fixed point on [0, 0.1].
// Returns a negative value when no root is bracketed.
inline double solve_bandwidth(double N, const std::vector<double>& a2) {
  const double n_clamped = std::clamp(N, 50.0, 1050.0);
  double tol = 1e-12 + 0.01 * (n_clamped - 50.0) / 1000.0;

  const double f0 = fixed_point_residual(0.0, N, a2);
  if (!std::isfinite(f0) || f0 >= 0.0) return -1.0;
  while (true) {
    const double fh = fixed_point_residual(tol, N, a2);
    if (std::isfinite(fh) && fh > 0.0) {
      double lo = 0.0, hi = tol;
      for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = fixed_point_residual(mid, N, a2);
        if (!std::isfinite(fm)) return -1.0;
        (fm < 0.0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    if (tol >= 0.1) return -1.0;
    tol = std::min(tol * 2.0, 0.1);
  }
}

// Interpolated quantile of sorted data (the common linear-interpolation
// convention), used only by the Silverman fallback.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * double(sorted.size() - 1);
  const size_t i = static_cast<size_t>(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - double(i);
  return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

}  // namespace kde_detail

// Density estimate of `samples` over [lo, hi] on a mesh of `mesh_points`
// points (rounded up to a power of two, at least 64). Out-of-range samples
// are clipped to the boundary. Cosine coefficients are taken from a linear
// binning on a 4x refined grid, which keeps the quadratic binning bias well
// below the reconstruction tolerances while the mesh itself stays at the
// requested resolution.
template <typename Scalar = double>
DensityEstimate<Scalar> kde_diffusion(const std::vector<Scalar>& samples,
                                      int mesh_points, Scalar lo, Scalar hi) {
  constexpr double pi = 3.14159265358979323846;
  const int n = static_cast<int>(samples.size());
  if (n < 5) throw std::invalid_argument("kde_diffusion requires at least 5 samples");
  if (!(lo < hi)) throw std::invalid_argument("kde_diffusion requires lo < hi");
  if (mesh_points < 1) throw std::invalid_argument("mesh_points must be positive");

  const int m = kde_detail::next_pow2_at_least_64(mesh_points);
  const double range = double(hi) - double(lo);

  std::vector<double> scaled(n);
  for (int i = 0; i < n; ++i) {
    scaled[i] = std::clamp((double(samples[i]) - double(lo)) / range, 0.0, 1.0);
  }

  // linear binning on the refined grid
  const int fine = 4 * (m - 1) + 1;
  std::vector<double> mass(fine, 0.0);
  for (int i = 0; i < n; ++i) {
    const double pos = scaled[i] * double(fine - 1);
    const int i0 = std::min(static_cast<int>(pos), fine - 2);
    const double frac = pos - double(i0);
    mass[i0] += (1.0 - frac) / n;
    mass[i0 + 1] += frac / n;
  }

  // b_k = sum_J mass_J cos(pi k J / (fine-1)), k = 0..m-1, accumulated per
  // occupied bin with a rotation recurrence
  std::vector<double> b(m, 0.0);
  for (int J = 0; J < fine; ++J) {
    if (mass[J] == 0.0) continue;
    const double phi = pi * double(J) / double(fine - 1);
    const double cphi = std::cos(phi), sphi = std::sin(phi);
    double c = 1.0, s = 0.0;
    for (int k = 0; k < m; ++k) {
      b[k] += mass[J] * c;
      const double cn = c * cphi - s * sphi;
      s = s * cphi + c * sphi;
      c = cn;
    }
  }

  // distinct raw sample count, the N of the plug-in functional
  std::vector<double> uniq(samples.begin(), samples.end());
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  const double N = double(uniq.size());

  std::vector<double> a2(m - 1);
  for (int k = 1; k < m; ++k) a2[k - 1] = b[k] * b[k];

  DensityEstimate<Scalar> est;
  est.sample_count = n;

  double t = kde_detail::solve_bandwidth(N, a2);
  if (t < 0.0) {
    est.fallback_bandwidth = true;
    std::vector<double> sorted(scaled);
    std::sort(sorted.begin(), sorted.end());
    double mean = 0.0;
    for (double v : sorted) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : sorted) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    const double iqr = kde_detail::quantile_sorted(sorted, 0.75) -
                       kde_detail::quantile_sorted(sorted, 0.25);
    const double h_s = 0.9 * std::min(sd, iqr / 1.34) * std::pow(double(n), -0.2);
    t = h_s * h_s;
  }
  const double t_floor = 1.0 / (double(m - 1) * double(m - 1));
  if (t < t_floor) {
    est.bandwidth_floored = true;
    t = t_floor;
  }
  est.bandwidth_t = Scalar(t);

  // smoothed series evaluated on the coarse mesh; coefficients beyond the
  // point where the smoothing factor underflows contribute nothing
  std::vector<double> g(m);
  g[0] = 1.0;  // b[0] == 1, weight 1
  int k_max = 0;
  for (int k = 1; k < m; ++k) {
    const double sk = std::exp(-double(k) * double(k) * pi * pi * t / 2.0);
    g[k] = 2.0 * sk * b[k];
    if (g[k] != 0.0) k_max = k;
  }

  est.mesh.resize(m);
  est.density.resize(m);
  std::vector<double> dens(m);
  for (int j = 0; j < m; ++j) {
    const double theta = pi * double(j) / double(m - 1);
    const double cth = std::cos(theta), sth = std::sin(theta);
    double c = 1.0, s = 0.0, acc = 0.0;
    for (int k = 0; k <= k_max; ++k) {
      acc += g[k] * c;
      const double cn = c * cth - s * sth;
      s = s * cth + c * sth;
      c = cn;
    }
    dens[j] = std::max(acc, 0.0);
  }

  const double dx = 1.0 / double(m - 1);
  double integral = 0.5 * (dens[0] + dens[m - 1]);
  for (int j = 1; j < m - 1; ++j) integral += dens[j];
  integral *= dx;

  for (int j = 0; j < m; ++j) {
    est.mesh[j] = Scalar(double(lo) + range * double(j) / double(m - 1));
    est.density[j] = Scalar(dens[j] / integral / range);
  }
  return est;
}

}  // namespace hypertune

#endif  // HYPERTUNE_KDE_HPP_
