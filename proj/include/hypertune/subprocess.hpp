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

#ifndef HYPERTUNE_SUBPROCESS_HPP_
#define HYPERTUNE_SUBPROCESS_HPP_

#include <string>
#include <vector>

#include "hypertune/eval.hpp"

namespace hypertune {

// Evaluator adapter spawning one child process per evaluation: writes one
// request line to the child's standard input, reads one response line from
// its standard output, and requires exit code 0 for an ok outcome. The whole
// child lifetime must fit the task's time budget; on expiry the child is
// killed and the evaluation is marked timeout. Spawn failures, malformed
// responses, non-finite objectives and nonzero exits are failed outcomes,
// never engine aborts.
class ExternalEvaluator : public Evaluator {
 public:
  explicit ExternalEvaluator(std::vector<std::string> argv);

  EvalOutcome evaluate(const EvalTask& task) override;
  bool enforces_budget() const override { return true; }

  const std::vector<std::string>& argv() const { return argv_; }

 private:
  std::vector<std::string> argv_;
};

}  // namespace hypertune

#endif  // HYPERTUNE_SUBPROCESS_HPP_
