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

#include "hypertune/run_log.hpp"

#include <stdexcept>
#include <utility>

#include "hypertune/param_space.hpp"
#include "json.hpp"

namespace hypertune {

namespace {

using json = nlohmann::json;

const char* kind_name(ParamKind kind) {
  switch (kind) {
    case ParamKind::kLinear:
      return "linear";
    case ParamKind::kPow10Affine:
      return "pow10_affine";
    case ParamKind::kPow2Affine:
      return "pow2_affine";
    case ParamKind::kDoubleExp10:
      return "double_exp10";
    case ParamKind::kOneMinusPow10:
      return "one_minus_pow10";
  }
  throw std::logic_error("unknown parameter kind");
}

ParamKind kind_from_name(const std::string& name) {
  if (name == "linear") return ParamKind::kLinear;
  if (name == "pow10_affine") return ParamKind::kPow10Affine;
  if (name == "pow2_affine") return ParamKind::kPow2Affine;
  if (name == "double_exp10") return ParamKind::kDoubleExp10;
  if (name == "one_minus_pow10") return ParamKind::kOneMinusPow10;
  throw std::runtime_error("run log: unknown parameter kind '" + name + "'");
}

json config_to_json(const RunConfig& config) {
  json j;
  j["eval_budget_s"] = config.eval_budget_s;
  j["failure_policy"] =
      config.failure_policy == FailurePolicyKind::kWorstOfGenerationPlusMargin
          ? "worst_of_generation"
          : "fixed_penalty";
  j["fixed_penalty"] = config.fixed_penalty;
  j["lambda"] = config.lambda;
  j["max_evaluations"] = config.max_evaluations;
  j["optimizer"] =
      config.optimizer == OptimizerKind::kCma ? "cma" : "random_prior";
  j["parallel"] = config.parallel;
  j["seed"] = config.seed;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig config;
  config.eval_budget_s = j.at("eval_budget_s").get<double>();
  const std::string policy = j.at("failure_policy").get<std::string>();
  if (policy == "worst_of_generation") {
    config.failure_policy = FailurePolicyKind::kWorstOfGenerationPlusMargin;
  } else if (policy == "fixed_penalty") {
    config.failure_policy = FailurePolicyKind::kFixedPenalty;
  } else {
    throw std::runtime_error("run log: unknown failure policy '" + policy +
                             "'");
  }
  config.fixed_penalty = j.at("fixed_penalty").get<double>();
  config.lambda = j.at("lambda").get<int>();
  config.max_evaluations = j.at("max_evaluations").get<std::int64_t>();
  const std::string optimizer = j.at("optimizer").get<std::string>();
  if (optimizer == "cma") {
    config.optimizer = OptimizerKind::kCma;
  } else if (optimizer == "random_prior") {
    config.optimizer = OptimizerKind::kRandomPrior;
  } else {
    throw std::runtime_error("run log: unknown optimizer '" + optimizer + "'");
  }
  config.parallel = j.at("parallel").get<int>();
  config.seed = j.at("seed").get<std::uint64_t>();
  return config;
}

json space_to_json(const SearchSpace& space) {
  json dims = json::array();
  for (const ParamSpec& spec : space.dims) {
    json d;
    d["a"] = spec.a;
    d["b"] = spec.b;
    d["hi"] = spec.hi;
    d["integer_round"] = spec.integer_round;
    d["kind"] = kind_name(spec.kind);
    d["lo"] = spec.lo;
    d["name"] = spec.name;
    dims.push_back(std::move(d));
  }
  return dims;
}

SearchSpace space_from_json(const json& dims) {
  SearchSpace space;
  for (const json& d : dims) {
    ParamSpec spec;
    spec.a = d.at("a").get<double>();
    spec.b = d.at("b").get<double>();
    spec.hi = d.at("hi").get<double>();
    spec.integer_round = d.at("integer_round").get<bool>();
    spec.kind = kind_from_name(d.at("kind").get<std::string>());
    spec.lo = d.at("lo").get<double>();
    spec.name = d.at("name").get<std::string>();
    space.dims.push_back(std::move(spec));
  }
  return space;
}

json record_to_json(const EvaluationRecord& record) {
  json j;
  j["candidate_id"] = record.candidate.id;
  if (record.status == EvalStatus::kFailed ||
      record.status == EvalStatus::kTimeout) {
    j["error"] = record.error;
  }
  j["gen_index"] = record.candidate.gen_index;
  j["generation"] = record.candidate.generation;
  json genotype = json::array();
  for (Eigen::Index i = 0; i < record.candidate.genotype.size(); ++i) {
    genotype.push_back(record.candidate.genotype[i]);
  }
  j["genotype"] = std::move(genotype);
  if (record.objective.has_value()) {
    j["objective"] = *record.objective;
  }
  j["phenotype"] = record.phenotype;  // dim order of the header's space
  j["status"] = to_string(record.status);
  j["wall_seconds"] = record.wall_seconds;
  j["worker_slot"] = record.worker_slot;
  return j;
}

EvaluationRecord record_from_json(const json& j) {
  EvaluationRecord record;
  record.candidate.id = j.at("candidate_id").get<std::int64_t>();
  record.candidate.gen_index = j.at("gen_index").get<int>();
  record.candidate.generation = j.at("generation").get<std::int64_t>();
  const json& genotype = j.at("genotype");
  record.candidate.genotype.resize(static_cast<Eigen::Index>(genotype.size()));
  for (std::size_t i = 0; i < genotype.size(); ++i) {
    record.candidate.genotype[static_cast<Eigen::Index>(i)] =
        genotype[i].get<double>();
  }
  record.status = eval_status_from_string(j.at("status").get<std::string>());
  if (j.contains("objective")) {
    record.objective = j.at("objective").get<double>();
  }
  if (j.contains("error")) {
    record.error = j.at("error").get<std::string>();
  }
  record.phenotype = j.at("phenotype").get<std::vector<double>>();
  record.wall_seconds = j.at("wall_seconds").get<double>();
  record.worker_slot = j.at("worker_slot").get<int>();
  return record;
}

}  // namespace

std::string header_line(const RunConfig& config, const SearchSpace& space,
                        const std::string& run_id) {
  json j;
  j["config"] = config_to_json(config);
  j["format"] = "hypertune-run-v1";
  j["run_id"] = run_id;
  j["space"] = space_to_json(space);
  return j.dump();
}

std::string record_line(const EvaluationRecord& record) {
  return record_to_json(record).dump();
}

std::string normalize_record_line(const std::string& line) {
  json j = json::parse(line);
  j["wall_seconds"] = 0.0;
  j["worker_slot"] = 0;
  return j.dump();
}

FileRecordSink::FileRecordSink(const std::string& path) : path_(path) {
  out_.open(path, std::ios::out | std::ios::trunc);
  if (!out_) {
    throw std::runtime_error("cannot open run log for writing: " + path);
  }
}

void FileRecordSink::write_header(const RunConfig& config,
                                  const SearchSpace& space,
                                  const std::string& run_id) {
  out_ << header_line(config, space, run_id) << '\n';
  out_.flush();
  if (!out_) {
    throw std::runtime_error("write failure on run log: " + path_);
  }
}

void FileRecordSink::write_record(const EvaluationRecord& record) {
  out_ << record_line(record) << '\n';
  out_.flush();
  if (!out_) {
    throw std::runtime_error("write failure on run log: " + path_);
  }
}

RunLog read_run_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open run log: " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("run log is empty: " + path);
  }
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("run log header is not valid JSON: " +
                             std::string(e.what()));
  }
  if (!header.contains("format") ||
      header.at("format").get<std::string>() != "hypertune-run-v1") {
    throw std::runtime_error("run log has unknown format marker: " + path);
  }

  RunLog log;
  log.config = config_from_json(header.at("config"));
  log.space = space_from_json(header.at("space"));
  log.run_id = header.at("run_id").get<std::string>();

  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) {
      continue;
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("run log line " + std::to_string(line_number) +
                               " is not valid JSON: " + std::string(e.what()));
    }
    EvaluationRecord record = record_from_json(j);
    if (record.status == EvalStatus::kOk && record.objective.has_value()) {
      if (log.best_index < 0 ||
          *record.objective <
              *log.records[static_cast<std::size_t>(log.best_index)]
                   .objective) {
        log.best_index = static_cast<std::int64_t>(log.records.size());
      }
    }
    log.records.push_back(std::move(record));
  }
  return log;
}

}  // namespace hypertune
