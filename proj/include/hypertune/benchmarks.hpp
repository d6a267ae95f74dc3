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
// In-process objective functions on the [0,1]^d genotype cube. Domains,
// optima and the synthetic validation-error surrogate are documented in
// docs/benchmarks.md.

#ifndef HYPERTUNE_BENCHMARKS_HPP_
#define HYPERTUNE_BENCHMARKS_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hypertune {

// f(x) = sum (x_i - s_i)^2; minimum 0 at x = s.
template <typename DerivedX, typename DerivedS>
double sphere(const Eigen::MatrixBase<DerivedX>& x,
              const Eigen::MatrixBase<DerivedS>& shift) {
  return (x - shift).squaredNorm();
}

template <typename Derived>
double sphere(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return (x.array() - Scalar(0.5)).matrix().squaredNorm();
}

// Rosenbrock on [0,1]^d mapped affinely to [-2.048, 2.048]^d;
// minimum 0 at x_i = 0.744140625 (the preimage of z_i = 1).
template <typename Derived>
double rosenbrock(const Eigen::MatrixBase<Derived>& x) {
  double total = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const double zi = -2.048 + 4.096 * double(x[i]);
    const double zn = -2.048 + 4.096 * double(x[i + 1]);
    const double u = zn - zi * zi;
    total += 100.0 * u * u + (1.0 - zi) * (1.0 - zi);
  }
  return total;
}

// Rastrigin on [0,1]^d mapped affinely to [-5.12, 5.12]^d;
// minimum exactly 0 at x = 0.5 * 1 (which maps to z = 0).
template <typename Derived>
double rastrigin(const Eigen::MatrixBase<Derived>& x) {
  const double two_pi = 2.0 * 3.14159265358979323846;
  double total = 10.0 * double(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double z = -5.12 + 10.24 * double(x[i]);
    total += z * z - 10.0 * std::cos(two_pi * z);
  }
  return total;
}

// Synthetic 19-D "validation error" landscape: a constant far-field level
// minus three anisotropic Gaussian wells. All constants are frozen (see
// docs/benchmarks.md); the global minimum sits at the first well's center,
// off the middle of the cube, with value kSurrogateOptimum.
inline constexpr int kSurrogateDim = 19;
inline constexpr double kSurrogateFarField = 0.85;
inline constexpr double kSurrogateOptimum = 0.049997762793149325;
extern const std::array<double, 3> surrogate_well_depth;
extern const std::array<std::array<double, kSurrogateDim>, 3> surrogate_well_center;
extern const std::array<std::array<double, kSurrogateDim>, 3> surrogate_well_width;
extern const std::array<double, kSurrogateDim> kSurrogateWellCenter1;

template <typename Derived>
double surrogate_dnn(const Eigen::MatrixBase<Derived>& x) {
  double total = kSurrogateFarField;
  for (int well = 0; well < 3; ++well) {
    double q = 0.0;
    for (int i = 0; i < kSurrogateDim; ++i) {
      const double d = (double(x[i]) - surrogate_well_center[well][i]) /
                       surrogate_well_width[well][i];
      q += d * d;
    }
    total -= surrogate_well_depth[well] * std::exp(-0.5 * q);
  }
  return total;
}

struct BenchmarkSpec {
  std::string name;  // sphere | rosenbrock | rastrigin | noisy_sphere | surrogate_dnn
  int dim = 0;
  double noise_sigma = 0.0;            // additive N(0, noise_sigma^2) observation noise
  std::optional<Eigen::VectorXd> shift;  // sphere only; default 0.5 * 1
  double fail_rate = 0.0;              // probability of a simulated failure
};

struct BenchmarkResult {
  bool failed = false;
  double objective = 0.0;
};

// Deterministic evaluation: the failure draw (if fail_rate > 0) and the
// noise draw (if noise_sigma > 0) come, in that order, from a generator
// seeded with derive_seed(seed, candidate_id), so values depend only on
// (spec, seed, candidate_id) and never on scheduling.
class Benchmark {
 public:
  Benchmark(BenchmarkSpec spec, std::uint64_t seed);

  BenchmarkResult evaluate(std::int64_t candidate_id, const Eigen::VectorXd& genotype) const;

  const BenchmarkSpec& spec() const { return spec_; }

  static bool known_name(const std::string& name);
  static std::vector<std::string> names();

 private:
  BenchmarkSpec spec_;
  std::uint64_t seed_;
  Eigen::VectorXd shift_;
};

}  // namespace hypertune

#endif  // HYPERTUNE_BENCHMARKS_HPP_
