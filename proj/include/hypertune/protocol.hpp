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
// Line protocol between the engine and external evaluator processes: exactly
// one request line on the child's standard input, exactly one response line
// on its standard output. Schema and examples in docs/wire_protocol.md.

#ifndef HYPERTUNE_PROTOCOL_HPP_
#define HYPERTUNE_PROTOCOL_HPP_

#include <map>
#include <string>

#include "hypertune/eval.hpp"

namespace hypertune {

struct WireRequest {
  std::string run_id;
  std::int64_t candidate_id = 0;
  std::int64_t generation = 0;
  double budget_seconds = 0;
  std::map<std::string, double> params;
};

// Serializes the request as one JSON line with keys in canonical
// (alphabetical) order; no trailing newline.
std::string build_request_line(const EvalTask& task);

WireRequest parse_request_line(const std::string& line);

// Parses a response line: {"objective": finite} yields ok, {"error": text}
// yields failed, anything else yields failed with a diagnostic.
EvalOutcome parse_response_line(const std::string& line);

std::string build_response_line(const EvalOutcome& outcome);

}  // namespace hypertune

#endif  // HYPERTUNE_PROTOCOL_HPP_
