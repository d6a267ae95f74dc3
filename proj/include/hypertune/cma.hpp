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
// CMA-ES on the [0,1]^d genotype cube: ask samples lambda candidates from the
// current multivariate normal, tell ranks them and updates mean, covariance
// and step size (weighted recombination, rank-one + rank-mu covariance
// update, cumulative step-size adaptation). Selection is purely rank based,
// so any strictly increasing transformation of the objective leaves the state
// trajectory bit-identical.

#ifndef HYPERTUNE_CMA_HPP_
#define HYPERTUNE_CMA_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "hypertune/rng.hpp"
#include "hypertune/strategy.hpp"

namespace hypertune {

template <typename Scalar = double>
struct Candidate {
  Eigen::Vector<Scalar, Eigen::Dynamic> genotype;      // in [0,1]^d
  Eigen::Vector<Scalar, Eigen::Dynamic> pre_boundary;  // last sample before clipping
  int gen_index = 0;          // 0..lambda-1 within the generation
  std::int64_t id = 0;        // run-unique, strictly increasing
  std::int64_t generation = 0;
};

template <typename Scalar = double>
struct CmaState {
  using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  int dim = 0;
  Vector mean;
  Scalar sigma = 0;
  Matrix cov;
  Matrix eig_basis;  // B, columns are eigenvectors of cov
  Vector eig_vals;   // D^2, eigenvalues of cov (cov = B diag(D^2) B^T)
  Vector path_sigma;
  Vector path_cov;
  std::int64_t generation = 0;
  StrategyParams<Scalar> strategy;
  Rng rng{0};
  std::int64_t eval_count = 0;

  // bookkeeping outside the mathematical state
  std::int64_t eigen_eval_count = 0;  // eval_count at the last eigendecomposition
  std::int64_t next_id = 0;
  bool awaiting_tell = false;
};

namespace detail {

// Draws one candidate from N(mean, sigma^2 B D^2 B^T), resampling up to 100
// times if a coordinate leaves [0,1]. If the last attempt still violates the
// cube the genotype is clipped while the pre-clip sample is kept: evaluation
// sees a feasible point, the distribution update keeps an unbiased sample.
template <typename Scalar>
Candidate<Scalar> draw_bounded(Rng& rng, const Eigen::Vector<Scalar, Eigen::Dynamic>& mean,
                               Scalar sigma,
                               const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& basis,
                               const Eigen::Vector<Scalar, Eigen::Dynamic>& scale) {
  const Eigen::Index d = mean.size();
  Candidate<Scalar> c;
  for (int attempt = 0; attempt < 100; ++attempt) {
    Eigen::Vector<Scalar, Eigen::Dynamic> z = rng.normal_vector<Scalar>(d);
    c.pre_boundary = mean + sigma * (basis * scale.cwiseProduct(z)).eval();
    if ((c.pre_boundary.array() >= Scalar(0)).all() &&
        (c.pre_boundary.array() <= Scalar(1)).all()) {
      break;
    }
  }
  c.genotype = c.pre_boundary.cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
  return c;
}

}  // namespace detail

template <typename Scalar = double>
CmaState<Scalar> init_cma(int dim, int lambda,
                          const Eigen::Vector<Scalar, Eigen::Dynamic>& mean,
                          Scalar sigma, std::uint64_t seed) {
  if (mean.size() != dim) throw std::invalid_argument("mean dimension mismatch");
  if (!((mean.array() >= Scalar(0)).all() && (mean.array() <= Scalar(1)).all())) {
    throw std::invalid_argument("mean must lie in [0,1]^d");
  }
  if (!(sigma > Scalar(0))) throw std::invalid_argument("sigma must be positive");

  CmaState<Scalar> s;
  s.dim = dim;
  s.strategy = default_strategy_params<Scalar>(dim, lambda);
  s.mean = mean;
  s.sigma = sigma;
  s.cov = CmaState<Scalar>::Matrix::Identity(dim, dim);
  s.eig_basis = CmaState<Scalar>::Matrix::Identity(dim, dim);
  s.eig_vals = CmaState<Scalar>::Vector::Ones(dim);
  s.path_sigma = CmaState<Scalar>::Vector::Zero(dim);
  s.path_cov = CmaState<Scalar>::Vector::Zero(dim);
  s.rng = Rng(seed);
  return s;
}

// Variant taking explicit strategy constants; exists for tests and the
// deliberately-broken-parameter hook of the bench suite.
template <typename Scalar = double>
CmaState<Scalar> init_cma_with(int dim, StrategyParams<Scalar> strategy,
                               const Eigen::Vector<Scalar, Eigen::Dynamic>& mean,
                               Scalar sigma, std::uint64_t seed) {
  CmaState<Scalar> s = init_cma<Scalar>(dim, strategy.lambda, mean, sigma, seed);
  s.strategy = std::move(strategy);
  return s;
}

template <typename Scalar = double>
CmaState<Scalar> init_cma_default(int dim, int lambda, std::uint64_t seed) {
  using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;
  return init_cma<Scalar>(dim, lambda, Vector::Constant(dim, Scalar(0.5)),
                          Scalar(0.2), seed);
}

// Refreshes the cached eigendecomposition lazily: only when more than
// 1 / (10 d (c_1 + c_mu)) evaluations have passed since the last refresh.
// A freshly initialized state never refreshes before the first tell, so
// generation 0 samples with B = I, D = 1, i.e. exactly from the prior.
template <typename Scalar>
void refresh_eigensystem_if_due(CmaState<Scalar>& s) {
  const Scalar due = Scalar(1) / (Scalar(10) * Scalar(s.dim) *
                                  (s.strategy.c_1 + s.strategy.c_mu));
  if (Scalar(s.eval_count - s.eigen_eval_count) <= due) return;

  s.cov = ((s.cov + s.cov.transpose()) / Scalar(2)).eval();
  Eigen::SelfAdjointEigenSolver<typename CmaState<Scalar>::Matrix> solver(s.cov);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("covariance eigendecomposition failed");
  }
  typename CmaState<Scalar>::Vector vals = solver.eigenvalues();
  // guard against round-off pushing tiny eigenvalues non-positive
  const Scalar floor = std::max(vals.maxCoeff(), Scalar(0)) *
                       std::numeric_limits<Scalar>::epsilon() * Scalar(100);
  const Scalar tiny = std::numeric_limits<Scalar>::min();
  s.eig_vals = vals.cwiseMax(std::max(floor, tiny));
  s.eig_basis = solver.eigenvectors();
  s.eigen_eval_count = s.eval_count;
}

template <typename Scalar = double>
std::vector<Candidate<Scalar>> ask(CmaState<Scalar>& s) {
  if (s.awaiting_tell) {
    throw std::logic_error("ask called twice without an intervening tell");
  }
  refresh_eigensystem_if_due(s);

  const typename CmaState<Scalar>::Vector d_scale = s.eig_vals.cwiseSqrt();
  std::vector<Candidate<Scalar>> out;
  out.reserve(s.strategy.lambda);
  for (int k = 0; k < s.strategy.lambda; ++k) {
    Candidate<Scalar> c = detail::draw_bounded<Scalar>(s.rng, s.mean, s.sigma,
                                                       s.eig_basis, d_scale);
    c.gen_index = k;
    c.id = s.next_id++;
    c.generation = s.generation;
    out.push_back(std::move(c));
  }
  s.awaiting_tell = true;
  return out;
}

// Ranks the evaluated candidates (ascending objective, ties broken by
// gen_index so the order is a deterministic total order) and applies the
// distribution update. Objectives enter through the ranking only.
template <typename Scalar = double>
void tell(CmaState<Scalar>& s,
          const std::vector<std::pair<Candidate<Scalar>, Scalar>>& evaluations) {
  using Vector = typename CmaState<Scalar>::Vector;
  using Matrix = typename CmaState<Scalar>::Matrix;

  if (!s.awaiting_tell) {
    throw std::logic_error("tell called without a preceding ask");
  }
  if (static_cast<int>(evaluations.size()) != s.strategy.lambda) {
    throw std::invalid_argument("tell requires exactly lambda evaluations");
  }
  std::vector<char> seen(evaluations.size(), 0);
  for (const auto& [cand, objective] : evaluations) {
    if (cand.generation != s.generation || cand.gen_index < 0 ||
        cand.gen_index >= s.strategy.lambda || seen[cand.gen_index]) {
      throw std::invalid_argument("evaluations do not match the preceding ask");
    }
    seen[cand.gen_index] = 1;
    if (!std::isfinite(objective)) {
      throw std::invalid_argument("non-finite objective; resolve failures upstream");
    }
  }

  std::vector<int> order(evaluations.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (evaluations[a].second != evaluations[b].second) {
      return evaluations[a].second < evaluations[b].second;
    }
    return evaluations[a].first.gen_index < evaluations[b].first.gen_index;
  });

  const StrategyParams<Scalar>& sp = s.strategy;
  const int mu = sp.mu;

  // selected steps y_i = (x_i - m) / sigma from the pre-boundary samples
  Matrix y(s.dim, mu);
  for (int i = 0; i < mu; ++i) {
    y.col(i) = (evaluations[order[i]].first.pre_boundary - s.mean) / s.sigma;
  }
  const Vector dy = y * sp.weights;

  s.mean += s.sigma * dy;

  // C^{-1/2} dy through the cached factorization
  const Vector d_scale = s.eig_vals.cwiseSqrt();
  const Vector whitened =
      s.eig_basis * (s.eig_basis.transpose() * dy).cwiseQuotient(d_scale).eval();

  s.path_sigma = (1 - sp.c_sigma) * s.path_sigma +
                 std::sqrt(sp.c_sigma * (2 - sp.c_sigma) * sp.mu_eff) * whitened;

  const Scalar ps_norm = s.path_sigma.norm();
  const Scalar expected = std::sqrt(
      1 - std::pow(1 - sp.c_sigma, Scalar(2) * Scalar(s.generation + 1)));
  const bool h_sigma =
      ps_norm / expected < (Scalar(1.4) + Scalar(2) / (s.dim + 1)) * sp.chi_n;

  s.path_cov = (1 - sp.c_c) * s.path_cov +
               (h_sigma ? std::sqrt(sp.c_c * (2 - sp.c_c) * sp.mu_eff) : Scalar(0)) * dy;

  Matrix rank_mu = Matrix::Zero(s.dim, s.dim);
  for (int i = 0; i < mu; ++i) {
    rank_mu.noalias() += sp.weights[i] * (y.col(i) * y.col(i).transpose());
  }
  // when h_sigma is off, the missing rank-one variance is compensated
  const Scalar hs_correction = h_sigma ? Scalar(0) : sp.c_c * (2 - sp.c_c);
  s.cov = (1 - sp.c_1 - sp.c_mu) * s.cov +
          sp.c_1 * (s.path_cov * s.path_cov.transpose() + hs_correction * s.cov) +
          sp.c_mu * rank_mu;
  s.cov = ((s.cov + s.cov.transpose()) / Scalar(2)).eval();

  s.sigma *= std::exp((sp.c_sigma / sp.d_sigma) * (ps_norm / sp.chi_n - 1));

  s.generation += 1;
  s.eval_count += sp.lambda;
  s.awaiting_tell = false;
}

// Independent draws from the prior N(0.5, 0.2^2 I) with the same boundary
// handling and the same seed-to-stream mapping as a freshly initialized
// optimizer, so generation 0 of the optimizer and this sampler coincide.
template <typename Scalar = double>
std::vector<Candidate<Scalar>> sample_prior(int dim, int n, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;
  Rng rng(seed);
  const Vector mean = Vector::Constant(dim, Scalar(0.5));
  const auto basis =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Identity(dim, dim);
  const Vector scale = Vector::Ones(dim);
  std::vector<Candidate<Scalar>> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    Candidate<Scalar> c =
        detail::draw_bounded<Scalar>(rng, mean, Scalar(0.2), basis, scale);
    c.gen_index = k;
    c.id = k;
    out.push_back(std::move(c));
  }
  return out;
}

// Stateful prior sampler for the random-search baseline: one generator
// stream continued across batches, ids and generations advancing like the
// optimizer's so run logs stay directly comparable.
template <typename Scalar = double>
class PriorSampler {
 public:
  PriorSampler(int dim, std::uint64_t seed) : dim_(dim), rng_(seed) {}

  std::vector<Candidate<Scalar>> next_batch(int n) {
    using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;
    const Vector mean = Vector::Constant(dim_, Scalar(0.5));
    const auto basis =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Identity(dim_, dim_);
    const Vector scale = Vector::Ones(dim_);
    std::vector<Candidate<Scalar>> out;
    out.reserve(n);
    for (int k = 0; k < n; ++k) {
      Candidate<Scalar> c =
          detail::draw_bounded<Scalar>(rng_, mean, Scalar(0.2), basis, scale);
      c.gen_index = k;
      c.id = next_id_++;
      c.generation = generation_;
      out.push_back(std::move(c));
    }
    generation_ += 1;
    return out;
  }

 private:
  int dim_;
  Rng rng_;
  std::int64_t next_id_ = 0;
  std::int64_t generation_ = 0;
};

}  // namespace hypertune

#endif  // HYPERTUNE_CMA_HPP_
