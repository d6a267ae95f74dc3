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
// Bundled external evaluator: speaks the line protocol on stdin/stdout and
// evaluates a builtin benchmark on the inverse-transformed parameters, so an
// external run can be compared record-for-record against an in-process one.
// Fault-injection flags target single candidate ids to exercise the engine's
// failure, crash, hang and malformed-response paths.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "hypertune/benchmarks.hpp"
#include "hypertune/param_space.hpp"
#include "hypertune/protocol.hpp"

namespace {

hypertune::SearchSpace load_space_arg(const std::string& arg) {
  constexpr const char kPrefix[] = "builtin:";
  if (arg.rfind(kPrefix, 0) == 0) {
    return hypertune::builtin_space(arg.substr(sizeof(kPrefix) - 1));
  }
  std::ifstream in(arg);
  if (!in) {
    throw std::invalid_argument("cannot read space file '" + arg + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return hypertune::parse_space(text.str());
}

int respond(const hypertune::EvalOutcome& outcome) {
  std::cout << hypertune::build_response_line(outcome) << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Line-protocol evaluator for builtin benchmarks"};
  std::string space_arg;
  std::string benchmark_name;
  std::uint64_t seed = 0;
  std::int64_t fail_on = -1;
  std::int64_t die_on = -1;
  std::int64_t hang_on = -1;
  std::int64_t malformed_on = -1;
  double fixed_objective = 0.0;

  app.add_option("--space", space_arg, "Space file, or builtin:<tag>")
      ->required();
  app.add_option("--benchmark", benchmark_name, "Builtin benchmark name")
      ->required();
  app.add_option("--seed", seed, "Benchmark seed (match the run seed)");
  app.add_option("--fail-on", fail_on,
                 "Candidate id answered with a simulated failure");
  app.add_option("--die-on", die_on,
                 "Candidate id that makes the stub exit without responding");
  app.add_option("--hang-on", hang_on,
                 "Candidate id that makes the stub hang past any budget");
  app.add_option("--malformed-on", malformed_on,
                 "Candidate id answered with a non-protocol line");
  CLI::Option* objective_opt = app.add_option(
      "--objective", fixed_objective, "Echo this objective, skip the benchmark");
  CLI11_PARSE(app, argc, argv);

  std::string line;
  if (!std::getline(std::cin, line)) {
    return respond({hypertune::EvalStatus::kFailed, 0.0, "no request line"});
  }

  hypertune::WireRequest request;
  try {
    request = hypertune::parse_request_line(line);
  } catch (const std::exception& e) {
    return respond({hypertune::EvalStatus::kFailed, 0.0,
                    std::string("bad request: ") + e.what()});
  }

  if (request.candidate_id == die_on) {
    return 9;  // crash path: no response, nonzero exit
  }
  if (request.candidate_id == hang_on) {
    std::this_thread::sleep_for(std::chrono::hours(24));
    return 9;
  }
  if (request.candidate_id == malformed_on) {
    std::cout << "this line is not a protocol response" << std::endl;
    return 0;
  }
  if (request.candidate_id == fail_on) {
    return respond({hypertune::EvalStatus::kFailed, 0.0, "simulated failure"});
  }
  if (objective_opt->count() > 0) {
    return respond({hypertune::EvalStatus::kOk, fixed_objective, {}});
  }

  try {
    const hypertune::SearchSpace space = load_space_arg(space_arg);
    const Eigen::VectorXd genotype =
        hypertune::inverse_transform(space, request.params);

    hypertune::BenchmarkSpec spec;
    spec.name = benchmark_name;
    spec.dim = space.dim_count();
    if (benchmark_name == "noisy_sphere") spec.noise_sigma = 0.05;
    const hypertune::Benchmark bench(spec, seed);
    const hypertune::BenchmarkResult result =
        bench.evaluate(request.candidate_id, genotype);
    if (result.failed) {
      return respond(
          {hypertune::EvalStatus::kFailed, 0.0, "simulated failure"});
    }
    return respond({hypertune::EvalStatus::kOk, result.objective, {}});
  } catch (const std::exception& e) {
    return respond({hypertune::EvalStatus::kFailed, 0.0, e.what()});
  }
}
