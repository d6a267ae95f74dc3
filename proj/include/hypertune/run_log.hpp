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
// Append-only run log: one header line (config, space, run id) followed by
// one line per evaluation record, all JSON with canonical key order. Format
// details in docs/wire_protocol.md.

#ifndef HYPERTUNE_RUN_LOG_HPP_
#define HYPERTUNE_RUN_LOG_HPP_

#include <fstream>
#include <string>

#include "hypertune/eval.hpp"

namespace hypertune {

std::string header_line(const RunConfig& config, const SearchSpace& space,
                        const std::string& run_id);
std::string record_line(const EvaluationRecord& record);

// Rewrites a record line with wall_seconds and worker_slot zeroed; those two
// fields carry scheduling metadata and are excluded whenever two logs are
// compared for determinism.
std::string normalize_record_line(const std::string& line);

class FileRecordSink : public RecordSink {
 public:
  explicit FileRecordSink(const std::string& path);

  void write_header(const RunConfig& config, const SearchSpace& space,
                    const std::string& run_id) override;
  void write_record(const EvaluationRecord& record) override;

 private:
  std::ofstream out_;
  std::string path_;
};

// Parses a complete run log file back into memory (pre-boundary samples are
// not serialized; reloaded candidates carry the genotype only).
RunLog read_run_log(const std::string& path);

}  // namespace hypertune

#endif  // HYPERTUNE_RUN_LOG_HPP_
