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

#ifndef HYPERTUNE_STRATEGY_HPP_
#define HYPERTUNE_STRATEGY_HPP_

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

namespace hypertune {

// Constants of the (mu/mu_w, lambda) evolution strategy. All values follow
// the standard default formulas, reproduced verbatim in docs/cma_defaults.md.
template <typename Scalar = double>
struct StrategyParams {
  int lambda = 0;  // population size
  int mu = 0;      // parent count, floor(lambda / 2)
  Eigen::Vector<Scalar, Eigen::Dynamic> weights;  // mu positive, non-increasing, sum 1
  Scalar mu_eff = 0;   // 1 / sum(weights^2), variance-effective selection mass
  Scalar c_sigma = 0;  // step-size path cumulation rate
  Scalar d_sigma = 0;  // step-size damping
  Scalar c_c = 0;      // covariance path cumulation rate
  Scalar c_1 = 0;      // rank-one learning rate
  Scalar c_mu = 0;     // rank-mu learning rate
  Scalar chi_n = 0;    // E||N(0, I_d)||
};

template <typename Scalar = double>
StrategyParams<Scalar> default_strategy_params(int dim, int lambda) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (lambda < 2) throw std::invalid_argument("lambda must be >= 2");

  StrategyParams<Scalar> p;
  p.lambda = lambda;
  p.mu = lambda / 2;

  p.weights.resize(p.mu);
  for (int i = 0; i < p.mu; ++i) {
    p.weights[i] = std::log(Scalar(p.mu) + Scalar(0.5)) - std::log(Scalar(i + 1));
  }
  p.weights /= p.weights.sum();
  p.mu_eff = Scalar(1) / p.weights.squaredNorm();

  const Scalar d = Scalar(dim);
  p.c_sigma = (p.mu_eff + 2) / (d + p.mu_eff + 5);
  p.d_sigma = 1 + 2 * std::max(Scalar(0),
                               std::sqrt((p.mu_eff - 1) / (d + 1)) - 1) +
              p.c_sigma;
  p.c_c = (4 + p.mu_eff / d) / (d + 4 + 2 * p.mu_eff / d);
  p.c_1 = 2 / ((d + Scalar(1.3)) * (d + Scalar(1.3)) + p.mu_eff);
  p.c_mu = std::min(1 - p.c_1, 2 * (p.mu_eff - 2 + 1 / p.mu_eff) /
                                   ((d + 2) * (d + 2) + p.mu_eff));
  p.chi_n = std::sqrt(d) * (1 - Scalar(1) / (4 * d) + Scalar(1) / (21 * d * d));
  return p;
}

}  // namespace hypertune

#endif  // HYPERTUNE_STRATEGY_HPP_
