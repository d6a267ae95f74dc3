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

#ifndef HYPERTUNE_BENCHMARK_EVALUATOR_HPP_
#define HYPERTUNE_BENCHMARK_EVALUATOR_HPP_

#include <utility>

#include "hypertune/benchmarks.hpp"
#include "hypertune/eval.hpp"

namespace hypertune {

// Runs a builtin benchmark in-process. Simulated failures carry the same
// message the bundled external stub uses, so in-process and external runs
// of one benchmark log identical records.
class BenchmarkEvaluator : public Evaluator {
 public:
  BenchmarkEvaluator(BenchmarkSpec spec, std::uint64_t seed)
      : bench_(std::move(spec), seed) {}
  explicit BenchmarkEvaluator(Benchmark bench) : bench_(std::move(bench)) {}

  EvalOutcome evaluate(const EvalTask& task) override {
    const BenchmarkResult r = bench_.evaluate(task.candidate_id, task.genotype);
    if (r.failed) return {EvalStatus::kFailed, 0.0, "simulated failure"};
    return {EvalStatus::kOk, r.objective, {}};
  }

  const Benchmark& benchmark() const { return bench_; }

 private:
  Benchmark bench_;
};

}  // namespace hypertune

#endif  // HYPERTUNE_BENCHMARK_EVALUATOR_HPP_
