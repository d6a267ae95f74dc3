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
// Generation-synchronous parallel evaluation: lambda candidates fan out to at
// most P concurrent evaluations, a per-evaluation time budget is enforced by
// the engine, failures receive finite penalty objectives, and every record is
// appended to the run log before the next generation starts.

#ifndef HYPERTUNE_EVAL_HPP_
#define HYPERTUNE_EVAL_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hypertune/cma.hpp"
#include "hypertune/param_space.hpp"

namespace hypertune {

enum class EvalStatus { kOk, kFailed, kTimeout };

const char* to_string(EvalStatus s);
EvalStatus eval_status_from_string(const std::string& s);

struct EvalTask {
  std::string run_id;
  std::int64_t candidate_id = 0;
  std::int64_t generation = 0;
  double budget_seconds = 0;
  Eigen::VectorXd genotype;
  const SearchSpace* space = nullptr;
  std::vector<double> phenotype;  // transform(space, genotype), dim order
};

struct EvalOutcome {
  EvalStatus status = EvalStatus::kFailed;
  double objective = 0.0;   // meaningful only when status == kOk
  std::string error;        // diagnostic for failed outcomes
};

// An evaluator maps one task to one outcome. Implementations must be safe to
// invoke from several threads at once. Implementations that enforce the time
// budget themselves (e.g. by killing a child process) report so; all others
// are wrapped in the engine's watchdog.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual EvalOutcome evaluate(const EvalTask& task) = 0;
  virtual bool enforces_budget() const { return false; }
};

struct EvaluationRecord {
  Candidate<double> candidate;
  std::vector<double> phenotype;
  EvalStatus status = EvalStatus::kFailed;
  std::optional<double> objective;  // present iff status == kOk
  std::string error;
  double wall_seconds = 0.0;
  int worker_slot = 0;
};

enum class FailurePolicyKind { kWorstOfGenerationPlusMargin, kFixedPenalty };
enum class OptimizerKind { kCma, kRandomPrior };

struct RunConfig {
  int lambda = 30;
  int parallel = 1;
  std::int64_t max_evaluations = 0;
  double eval_budget_s = 3600.0;
  std::uint64_t seed = 0;
  FailurePolicyKind failure_policy = FailurePolicyKind::kWorstOfGenerationPlusMargin;
  double fixed_penalty = 0.0;
  OptimizerKind optimizer = OptimizerKind::kCma;
};

struct RunLog {
  RunConfig config;
  SearchSpace space;
  std::string run_id;
  std::vector<EvaluationRecord> records;
  // index into records of the best ok objective, -1 if none
  std::int64_t best_index = -1;
};

// A whole generation finished without a single ok evaluation; the ranking
// has nothing to stand on and the run aborts.
class GenerationCollapse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Receives every record right after its generation completes; the default
// file sink writes the run-log line format (docs/wire_protocol.md).
class RecordSink {
 public:
  virtual ~RecordSink() = default;
  virtual void write_header(const RunConfig& config, const SearchSpace& space,
                            const std::string& run_id) = 0;
  virtual void write_record(const EvaluationRecord& record) = 0;
};

// Evaluates `candidates` with at most `parallel` evaluations in flight and
// returns one record per candidate, ordered by gen_index. Evaluations that
// exceed `budget_s` are marked timeout; the engine never waits on a
// budget-enforcing evaluator longer than the budget plus a grace margin.
std::vector<EvaluationRecord> dispatch_generation(
    const std::vector<Candidate<double>>& candidates, const SearchSpace& space,
    Evaluator& evaluator, int parallel, double budget_s, const std::string& run_id);

// Replaces failed/timeout records by finite penalty objectives: the worst ok
// objective of the generation plus 10% of the generation's ok spread (plus
// 1.0 when the spread is zero), or the configured fixed penalty. Throws
// GenerationCollapse when no record is ok.
std::vector<double> resolve_failures(const std::vector<EvaluationRecord>& records,
                                     FailurePolicyKind policy, double fixed_penalty);

std::string derive_run_id(const RunConfig& config);

// Rejects inconsistent configurations (parallel < 1, lambda too small for the
// optimizer, max_evaluations < lambda) with std::invalid_argument. Called by
// run_optimization; callers that open output files first should call it
// earlier so a bad configuration never leaves a partial file behind.
void validate_run_config(const RunConfig& config);

// Full optimization loop: ask (or prior-sample), dispatch, resolve, tell,
// repeated until at least max_evaluations evaluations have been recorded
// (whole generations only, so the count may overshoot by up to lambda - 1).
RunLog run_optimization(const RunConfig& config, const SearchSpace& space,
                        Evaluator& evaluator, RecordSink* sink);

}  // namespace hypertune

#endif  // HYPERTUNE_EVAL_HPP_
