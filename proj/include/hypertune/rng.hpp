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

#ifndef HYPERTUNE_RNG_HPP_
#define HYPERTUNE_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace hypertune {

// SplitMix64 output function. Used for seed scrambling and stream derivation
// so that nearby user seeds do not produce correlated mt19937_64 streams.
// The full algorithm is documented in docs/determinism.md; changing any
// constant here silently breaks reproducibility of every recorded run.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a base seed and a stream key
// (e.g. one stream per candidate id for evaluation noise).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t key) {
  return splitmix64(base ^ (0x9E3779B97F4A7C15ULL * (key + 0x632BE59BD9B4E019ULL)));
}

// Deterministic random source: mt19937_64 seeded through splitmix64, with
// fixed uniform and normal recipes so runs replay bit-identically on a given
// toolchain regardless of standard-library distribution implementations
// (std::normal_distribution is deliberately not used -- its draw sequence is
// unspecified and varies between standard libraries).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  // Uniform on [0, 1) with 53-bit resolution; consumes one engine draw.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via the Box-Muller cosine branch; consumes exactly two
  // engine draws and keeps no cached spare, so the draw count per call is a
  // fixed, documented quantity.
  double normal() {
    const double u1 = 1.0 - uniform();  // in (0, 1], keeps log() finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  template <typename Scalar = double>
  Eigen::Vector<Scalar, Eigen::Dynamic> normal_vector(Eigen::Index n) {
    Eigen::Vector<Scalar, Eigen::Dynamic> v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v[i] = static_cast<Scalar>(normal());
    }
    return v;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hypertune

#endif  // HYPERTUNE_RNG_HPP_
