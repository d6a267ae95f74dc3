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
// Post-hoc analysis of run logs: best-so-far trajectories, early-vs-late
// per-dimension genotype densities, objective densities with divergence
// fractions, and CSV table writers for all three.

#ifndef HYPERTUNE_REPORT_HPP_
#define HYPERTUNE_REPORT_HPP_

#include <string>
#include <vector>

#include "hypertune/eval.hpp"
#include "hypertune/kde.hpp"

namespace hypertune {

// Per-evaluation running best plus per-generation summaries. All parallel
// vectors below are indexed by evaluation (records sorted by candidate id);
// the gen_* vectors are indexed by generation. Entries that have no ok
// objective to draw from are NaN.
struct Trajectory {
  std::vector<std::int64_t> eval_index;  // 1-based evaluation counter
  std::vector<std::int64_t> candidate_id;
  std::vector<std::int64_t> generation;
  std::vector<EvalStatus> status;
  std::vector<double> objective;     // NaN unless status == ok
  std::vector<double> running_best;  // non-increasing once defined

  std::vector<std::int64_t> gen_number;
  std::vector<double> gen_best;
  std::vector<double> gen_median;  // median of the generation's ok objectives
};

// Running minimum over ok objectives in candidate-id order; failed and
// timeout records advance eval_index without touching the minimum. Throws
// std::invalid_argument on an empty log or one with zero ok records.
Trajectory best_so_far(const RunLog& log);

// Early-vs-late genotype densities: for every dimension, a density over the
// coordinate values of the first `first_n` and of the last `last_m` records,
// estimated on [0, 1].
struct DensityReport {
  std::vector<std::string> dim_names;
  std::vector<DensityEstimate<double>> first_density;
  std::vector<DensityEstimate<double>> last_density;
  int first_n = 0;
  int last_m = 0;
};

// Throws std::invalid_argument with "insufficient records" when the log
// holds fewer than first_n + last_m records.
DensityReport density_report(const RunLog& log, int first_n = 30,
                             int last_m = 100, int mesh = 256);

struct ErrorDensityEntry {
  std::string run_id;
  DensityEstimate<double> density;   // over ok objectives, domain padded 5%
  double divergence_fraction = 0.0;  // (#obj > threshold or status != ok)/N
};

std::vector<ErrorDensityEntry> error_density(const std::vector<RunLog>& logs,
                                             int mesh = 5000,
                                             double divergence_threshold = 0.7);

// Shortest-faithful decimal for CSV cells: 17 significant digits.
std::string format_sig17(double value);

void write_trajectory_csv(const std::string& path, const std::string& source,
                          const RunLog& log, const Trajectory& trajectory);
void write_density_report_csv(const std::string& path,
                              const std::string& source, const RunLog& log,
                              const DensityReport& report);
void write_error_density_csv(const std::string& path,
                             const std::vector<std::string>& sources,
                             const std::vector<ErrorDensityEntry>& entries,
                             double divergence_threshold);

}  // namespace hypertune

#endif  // HYPERTUNE_REPORT_HPP_
