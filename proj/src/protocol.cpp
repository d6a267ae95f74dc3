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

#include "hypertune/protocol.hpp"

#include <cmath>

#include "json.hpp"

namespace hypertune {

using json = nlohmann::json;

std::string build_request_line(const EvalTask& task) {
  json params = json::object();
  if (task.space) {
    for (size_t i = 0; i < task.space->dims.size(); ++i) {
      params[task.space->dims[i].name] = task.phenotype[i];
    }
  }
  json req = {
      {"budget_seconds", task.budget_seconds},
      {"candidate_id", task.candidate_id},
      {"generation", task.generation},
      {"params", std::move(params)},
      {"run_id", task.run_id},
  };
  return req.dump();
}

WireRequest parse_request_line(const std::string& line) {
  json req = json::parse(line);
  WireRequest out;
  out.run_id = req.at("run_id").get<std::string>();
  out.candidate_id = req.at("candidate_id").get<std::int64_t>();
  out.generation = req.at("generation").get<std::int64_t>();
  out.budget_seconds = req.at("budget_seconds").get<double>();
  for (const auto& [name, value] : req.at("params").items()) {
    out.params[name] = value.get<double>();
  }
  return out;
}

EvalOutcome parse_response_line(const std::string& line) {
  json resp;
  try {
    resp = json::parse(line);
  } catch (const json::exception& e) {
    return {EvalStatus::kFailed, 0.0, std::string("malformed response: ") + e.what()};
  }
  if (!resp.is_object()) {
    return {EvalStatus::kFailed, 0.0, "malformed response: not an object"};
  }
  if (resp.contains("error")) {
    std::string message = resp["error"].is_string()
                              ? resp["error"].get<std::string>()
                              : resp["error"].dump();
    return {EvalStatus::kFailed, 0.0, std::move(message)};
  }
  if (!resp.contains("objective") || !resp["objective"].is_number()) {
    return {EvalStatus::kFailed, 0.0, "malformed response: no numeric 'objective'"};
  }
  const double value = resp["objective"].get<double>();
  if (!std::isfinite(value)) {
    return {EvalStatus::kFailed, 0.0, "non-finite objective"};
  }
  return {EvalStatus::kOk, value, {}};
}

std::string build_response_line(const EvalOutcome& outcome) {
  if (outcome.status == EvalStatus::kOk) {
    return json{{"objective", outcome.objective}}.dump();
  }
  return json{{"error", outcome.error.empty() ? "evaluation failed" : outcome.error}}.dump();
}

}  // namespace hypertune
