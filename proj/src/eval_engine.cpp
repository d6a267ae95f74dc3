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

#include "hypertune/eval.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

#include "hypertune/rng.hpp"

namespace hypertune {

const char* to_string(EvalStatus s) {
  switch (s) {
    case EvalStatus::kOk: return "ok";
    case EvalStatus::kFailed: return "failed";
    case EvalStatus::kTimeout: return "timeout";
  }
  return "?";
}

EvalStatus eval_status_from_string(const std::string& s) {
  if (s == "ok") return EvalStatus::kOk;
  if (s == "failed") return EvalStatus::kFailed;
  if (s == "timeout") return EvalStatus::kTimeout;
  throw std::invalid_argument("unknown evaluation status '" + s + "'");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs one evaluation under the engine's watchdog: the evaluator executes on
// a helper thread while this thread waits at most the budget. On expiry the
// record is marked timeout immediately; the helper thread is handed back to
// the caller to be joined at the generation barrier (evaluators cannot be
// interrupted mid-call, but they never outlive the dispatch).
EvalOutcome run_with_watchdog(Evaluator& evaluator, const EvalTask& task,
                              std::vector<std::thread>& stragglers,
                              std::mutex& straggler_mutex) {
  auto promise = std::make_shared<std::promise<EvalOutcome>>();
  std::future<EvalOutcome> future = promise->get_future();
  std::thread runner([&evaluator, task, promise]() {
    try {
      promise->set_value(evaluator.evaluate(task));
    } catch (const std::exception& e) {
      promise->set_value({EvalStatus::kFailed, 0.0, e.what()});
    }
  });
  const auto budget =
      std::chrono::duration<double>(std::max(task.budget_seconds, 0.0));
  if (future.wait_for(budget) == std::future_status::ready) {
    runner.join();
    return future.get();
  }
  {
    std::lock_guard<std::mutex> lock(straggler_mutex);
    stragglers.push_back(std::move(runner));
  }
  return {EvalStatus::kTimeout, 0.0, {}};
}

}  // namespace

std::vector<EvaluationRecord> dispatch_generation(
    const std::vector<Candidate<double>>& candidates, const SearchSpace& space,
    Evaluator& evaluator, int parallel, double budget_s, const std::string& run_id) {
  if (parallel < 1) throw std::invalid_argument("parallel must be >= 1");
  if (candidates.empty()) throw std::invalid_argument("no candidates to dispatch");

  std::vector<EvaluationRecord> records(candidates.size());
  std::atomic<size_t> next{0};
  std::vector<std::thread> stragglers;
  std::mutex straggler_mutex;
  const bool self_budgeting = evaluator.enforces_budget();

  auto worker = [&](int slot) {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= candidates.size()) return;
      const Candidate<double>& cand = candidates[i];

      EvaluationRecord& rec = records[i];
      rec.candidate = cand;
      rec.worker_slot = slot;

      EvalTask task;
      task.run_id = run_id;
      task.candidate_id = cand.id;
      task.generation = cand.generation;
      task.budget_seconds = budget_s;
      task.genotype = cand.genotype;
      task.space = &space;

      const auto start = Clock::now();
      EvalOutcome outcome;
      try {
        task.phenotype = transform(space, cand.genotype);
        outcome = self_budgeting
                      ? evaluator.evaluate(task)
                      : run_with_watchdog(evaluator, task, stragglers,
                                          straggler_mutex);
      } catch (const std::exception& e) {
        outcome = {EvalStatus::kFailed, 0.0, e.what()};
      }
      rec.wall_seconds = seconds_since(start);
      rec.phenotype = task.phenotype;
      rec.status = outcome.status;
      rec.error = outcome.error;
      if (outcome.status == EvalStatus::kOk) {
        if (std::isfinite(outcome.objective)) {
          rec.objective = outcome.objective;
        } else {
          rec.status = EvalStatus::kFailed;
          rec.error = "non-finite objective";
        }
      }
    }
  };

  const int pool = std::min<int>(parallel, static_cast<int>(candidates.size()));
  std::vector<std::thread> threads;
  threads.reserve(pool);
  for (int slot = 0; slot < pool; ++slot) threads.emplace_back(worker, slot);
  for (std::thread& t : threads) t.join();
  // generation barrier: timed-out evaluations still running must land before
  // the records are handed on
  for (std::thread& t : stragglers) t.join();
  return records;
}

std::vector<double> resolve_failures(const std::vector<EvaluationRecord>& records,
                                     FailurePolicyKind policy, double fixed_penalty) {
  double worst = -std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  int ok_count = 0;
  for (const EvaluationRecord& r : records) {
    if (r.status == EvalStatus::kOk) {
      ++ok_count;
      worst = std::max(worst, *r.objective);
      best = std::min(best, *r.objective);
    }
  }
  if (ok_count == 0) {
    throw GenerationCollapse("generation collapse: no successful evaluation in generation " +
                             std::to_string(records.empty() ? -1 : records.front().candidate.generation));
  }
  double penalty;
  if (policy == FailurePolicyKind::kFixedPenalty) {
    penalty = fixed_penalty;
  } else {
    const double spread = worst - best;
    penalty = worst + (spread > 0.0 ? 0.1 * spread : 1.0);
  }

  std::vector<double> objectives(records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    objectives[i] = records[i].status == EvalStatus::kOk ? *records[i].objective : penalty;
  }
  return objectives;
}

std::string derive_run_id(const RunConfig& config) {
  const std::uint64_t h = derive_seed(config.seed, 0x72756E5F6964ULL);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "r%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void validate_run_config(const RunConfig& config) {
  if (config.parallel < 1) throw std::invalid_argument("parallel must be >= 1");
  if (config.optimizer == OptimizerKind::kCma && config.lambda < 2) {
    throw std::invalid_argument("lambda must be >= 2 for the cma optimizer");
  }
  if (config.lambda < 1) throw std::invalid_argument("lambda must be >= 1");
  if (config.max_evaluations < config.lambda) {
    throw std::invalid_argument("max_evaluations must be at least lambda");
  }
  if (!(config.eval_budget_s > 0)) {
    throw std::invalid_argument("eval budget must be positive");
  }
}

RunLog run_optimization(const RunConfig& config, const SearchSpace& space,
                        Evaluator& evaluator, RecordSink* sink) {
  validate_run_config(config);

  RunLog log;
  log.config = config;
  log.space = space;
  log.run_id = derive_run_id(config);
  if (sink) sink->write_header(config, space, log.run_id);

  const int dim = space.dim_count();
  std::optional<CmaState<double>> cma;
  std::optional<PriorSampler<double>> prior;
  if (config.optimizer == OptimizerKind::kCma) {
    cma = init_cma_default<double>(dim, config.lambda, config.seed);
  } else {
    prior.emplace(dim, config.seed);
  }

  double best = std::numeric_limits<double>::infinity();
  std::int64_t evals = 0;
  while (evals < config.max_evaluations) {
    std::vector<Candidate<double>> candidates =
        cma ? ask(*cma) : prior->next_batch(config.lambda);

    std::vector<EvaluationRecord> records = dispatch_generation(
        candidates, space, evaluator, config.parallel, config.eval_budget_s,
        log.run_id);
    for (const EvaluationRecord& rec : records) {
      if (sink) sink->write_record(rec);
      if (rec.status == EvalStatus::kOk && *rec.objective < best) {
        best = *rec.objective;
        log.best_index = static_cast<std::int64_t>(log.records.size());
      }
      log.records.push_back(rec);
      ++evals;
    }

    // may throw GenerationCollapse; the collapsed generation is already logged
    const std::vector<double> objectives = resolve_failures(
        records, config.failure_policy, config.fixed_penalty);
    if (cma) {
      std::vector<std::pair<Candidate<double>, double>> evaluations;
      evaluations.reserve(candidates.size());
      for (size_t i = 0; i < candidates.size(); ++i) {
        evaluations.emplace_back(candidates[i], objectives[i]);
      }
      tell(*cma, evaluations);
    }
  }
  return log;
}

}  // namespace hypertune
