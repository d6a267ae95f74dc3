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

#include "hypertune/benchmarks.hpp"

#include <algorithm>
#include <stdexcept>

#include "hypertune/rng.hpp"

namespace hypertune {

// Frozen surrogate landscape constants. Regenerating these invalidates every
// recorded surrogate run; treat them as part of the wire format.
const std::array<double, 3> surrogate_well_depth = {0.80, 0.50, 0.30};

const std::array<std::array<double, kSurrogateDim>, 3> surrogate_well_center = {{
    {0.6503, 0.2859, 0.7728, 0.3664, 0.7371, 0.4079, 0.4950, 0.7688, 0.3144,
     0.5124, 0.3207, 0.7162, 0.3296, 0.5473, 0.7435, 0.6265, 0.3780, 0.3351,
     0.3337},
    {0.1815, 0.7497, 0.3314, 0.8114, 0.3001, 0.8534, 0.9602, 0.3037, 0.7633,
     0.0717, 0.7810, 0.2735, 0.7850, 0.0953, 0.3114, 0.1707, 0.8294, 0.7945,
     0.7998},
    {0.1225, 0.8889, 0.8077, 0.8807, 0.3068, 0.8414, 0.3517, 0.2959, 0.7767,
     0.9109, 0.8851, 0.2242, 0.6051, 0.4399, 0.9104, 0.5205, 0.9064, 0.6688,
     0.7002},
}};

const std::array<std::array<double, kSurrogateDim>, 3> surrogate_well_width = {{
    {0.3390, 0.2529, 0.3471, 0.3150, 0.2708, 0.3548, 0.3658, 0.3011, 0.2682,
     0.3557, 0.2113, 0.3402, 0.2823, 0.3066, 0.2437, 0.3440, 0.3105, 0.2439,
     0.3363},
    {0.3600, 0.4131, 0.3369, 0.3116, 0.2445, 0.3251, 0.4091, 0.3914, 0.3635,
     0.2542, 0.4003, 0.4076, 0.2537, 0.3789, 0.2775, 0.2667, 0.3794, 0.3044,
     0.3792},
    {0.3577, 0.4283, 0.3076, 0.4004, 0.3794, 0.3787, 0.3238, 0.3810, 0.3379,
     0.3984, 0.2952, 0.4143, 0.3070, 0.3846, 0.2847, 0.3781, 0.4000, 0.2847,
     0.3495},
}};

const std::array<double, kSurrogateDim> kSurrogateWellCenter1 = surrogate_well_center[0];

Benchmark::Benchmark(BenchmarkSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), seed_(seed) {
  if (!known_name(spec_.name)) {
    throw std::invalid_argument("unknown benchmark '" + spec_.name + "'");
  }
  if (spec_.dim < 1) throw std::invalid_argument("benchmark dim must be >= 1");
  if (spec_.name == "surrogate_dnn" && spec_.dim != kSurrogateDim) {
    throw std::invalid_argument("surrogate_dnn is fixed at " +
                                std::to_string(kSurrogateDim) + " dimensions");
  }
  if (spec_.name == "rosenbrock" && spec_.dim < 2) {
    throw std::invalid_argument("rosenbrock needs dim >= 2");
  }
  if (spec_.noise_sigma < 0) throw std::invalid_argument("noise_sigma must be >= 0");
  if (!(spec_.fail_rate >= 0 && spec_.fail_rate < 1)) {
    throw std::invalid_argument("fail_rate must lie in [0, 1)");
  }
  if (spec_.shift) {
    if (spec_.shift->size() != spec_.dim) {
      throw std::invalid_argument("shift dimension mismatch");
    }
    shift_ = *spec_.shift;
  } else {
    shift_ = Eigen::VectorXd::Constant(spec_.dim, 0.5);
  }
}

BenchmarkResult Benchmark::evaluate(std::int64_t candidate_id,
                                    const Eigen::VectorXd& genotype) const {
  if (genotype.size() != spec_.dim) {
    throw std::invalid_argument("genotype dimension mismatch");
  }
  Rng rng(derive_seed(seed_, static_cast<std::uint64_t>(candidate_id)));
  if (spec_.fail_rate > 0 && rng.uniform() < spec_.fail_rate) {
    return {true, 0.0};
  }

  double value;
  if (spec_.name == "sphere" || spec_.name == "noisy_sphere") {
    value = sphere(genotype, shift_);
  } else if (spec_.name == "rosenbrock") {
    value = rosenbrock(genotype);
  } else if (spec_.name == "rastrigin") {
    value = rastrigin(genotype);
  } else {
    value = surrogate_dnn(genotype);
  }
  if (spec_.noise_sigma > 0) {
    value += spec_.noise_sigma * rng.normal();
  }
  return {false, value};
}

bool Benchmark::known_name(const std::string& name) {
  const auto all = names();
  return std::find(all.begin(), all.end(), name) != all.end();
}

std::vector<std::string> Benchmark::names() {
  return {"sphere", "rosenbrock", "rastrigin", "noisy_sphere", "surrogate_dnn"};
}

}  // namespace hypertune
