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

#include "hypertune/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hypertune {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double median_of(std::vector<double> values) {
  if (values.empty()) return kNan;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::ofstream open_table(const std::string& path) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open report table for writing: " + path);
  }
  return out;
}

void finish_table(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) {
    throw std::runtime_error("write failure on report table: " + path);
  }
}

}  // namespace

Trajectory best_so_far(const RunLog& log) {
  if (log.records.empty()) {
    throw std::invalid_argument("best_so_far: log has no records");
  }
  std::vector<std::size_t> order(log.records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return log.records[a].candidate.id < log.records[b].candidate.id;
  });

  Trajectory t;
  t.eval_index.reserve(order.size());
  double best = kNan;
  bool any_ok = false;
  std::int64_t current_gen = -1;
  std::vector<double> gen_ok;
  double gen_best = kNan;
  auto flush_generation = [&] {
    if (current_gen < 0) return;
    t.gen_number.push_back(current_gen);
    t.gen_best.push_back(gen_best);
    t.gen_median.push_back(median_of(gen_ok));
    gen_ok.clear();
    gen_best = kNan;
  };

  std::int64_t eval_index = 0;
  for (std::size_t idx : order) {
    const EvaluationRecord& rec = log.records[idx];
    if (rec.candidate.generation != current_gen) {
      flush_generation();
      current_gen = rec.candidate.generation;
    }
    ++eval_index;
    t.eval_index.push_back(eval_index);
    t.candidate_id.push_back(rec.candidate.id);
    t.generation.push_back(rec.candidate.generation);
    t.status.push_back(rec.status);
    if (rec.status == EvalStatus::kOk && rec.objective.has_value()) {
      const double v = *rec.objective;
      t.objective.push_back(v);
      best = any_ok ? std::min(best, v) : v;
      any_ok = true;
      gen_ok.push_back(v);
      gen_best = std::isnan(gen_best) ? v : std::min(gen_best, v);
    } else {
      t.objective.push_back(kNan);
    }
    t.running_best.push_back(any_ok ? best : kNan);
  }
  flush_generation();

  if (!any_ok) {
    throw std::invalid_argument("best_so_far: log has zero ok records");
  }
  return t;
}

DensityReport density_report(const RunLog& log, int first_n, int last_m,
                             int mesh) {
  if (first_n < 5 || last_m < 5) {
    throw std::invalid_argument(
        "density_report: first/last windows need at least 5 records each");
  }
  const std::size_t need = static_cast<std::size_t>(first_n) +
                           static_cast<std::size_t>(last_m);
  if (log.records.size() < need) {
    throw std::invalid_argument(
        "density_report: insufficient records (" +
        std::to_string(log.records.size()) + " < " + std::to_string(need) +
        " = first " + std::to_string(first_n) + " + last " +
        std::to_string(last_m) + ")");
  }
  const std::size_t dim = log.space.dims.size();
  for (const EvaluationRecord& rec : log.records) {
    if (static_cast<std::size_t>(rec.candidate.genotype.size()) != dim) {
      throw std::invalid_argument(
          "density_report: record genotype length disagrees with the space");
    }
  }

  DensityReport report;
  report.first_n = first_n;
  report.last_m = last_m;
  const std::size_t total = log.records.size();
  for (std::size_t d = 0; d < dim; ++d) {
    report.dim_names.push_back(log.space.dims[d].name);
    std::vector<double> first_coords(static_cast<std::size_t>(first_n));
    for (int i = 0; i < first_n; ++i) {
      first_coords[static_cast<std::size_t>(i)] =
          log.records[static_cast<std::size_t>(i)]
              .candidate.genotype[static_cast<Eigen::Index>(d)];
    }
    std::vector<double> last_coords(static_cast<std::size_t>(last_m));
    for (int i = 0; i < last_m; ++i) {
      const std::size_t idx = total - static_cast<std::size_t>(last_m) +
                              static_cast<std::size_t>(i);
      last_coords[static_cast<std::size_t>(i)] =
          log.records[idx].candidate.genotype[static_cast<Eigen::Index>(d)];
    }
    report.first_density.push_back(
        kde_diffusion<double>(first_coords, mesh, 0.0, 1.0));
    report.last_density.push_back(
        kde_diffusion<double>(last_coords, mesh, 0.0, 1.0));
  }
  return report;
}

std::vector<ErrorDensityEntry> error_density(const std::vector<RunLog>& logs,
                                             int mesh,
                                             double divergence_threshold) {
  if (logs.empty()) {
    throw std::invalid_argument("error_density: no logs given");
  }
  std::vector<ErrorDensityEntry> entries;
  entries.reserve(logs.size());
  for (const RunLog& log : logs) {
    if (log.records.empty()) {
      throw std::invalid_argument("error_density: log '" + log.run_id +
                                  "' has no records");
    }
    std::vector<double> ok_objectives;
    std::size_t divergent = 0;
    for (const EvaluationRecord& rec : log.records) {
      if (rec.status == EvalStatus::kOk && rec.objective.has_value()) {
        ok_objectives.push_back(*rec.objective);
        if (*rec.objective > divergence_threshold) ++divergent;
      } else {
        ++divergent;
      }
    }
    if (ok_objectives.size() < 5) {
      throw std::invalid_argument("error_density: log '" + log.run_id +
                                  "' has fewer than 5 ok objectives");
    }
    const auto [lo_it, hi_it] =
        std::minmax_element(ok_objectives.begin(), ok_objectives.end());
    double lo = *lo_it;
    double hi = *hi_it;
    const double range = hi - lo;
    // 5% padding each side; a zero range (all objectives identical) gets a
    // unit-width window so the mesh stays well defined.
    const double pad = range > 0 ? 0.05 * range : 0.5;
    lo -= pad;
    hi += pad;

    ErrorDensityEntry entry;
    entry.run_id = log.run_id;
    entry.density = kde_diffusion<double>(ok_objectives, mesh, lo, hi);
    entry.divergence_fraction =
        static_cast<double>(divergent) / static_cast<double>(log.records.size());
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::string format_sig17(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_trajectory_csv(const std::string& path, const std::string& source,
                          const RunLog& log, const Trajectory& trajectory) {
  std::ofstream out = open_table(path);
  out << "# best-so-far trajectory; source=" << source
      << "; run_id=" << log.run_id << "; records=" << log.records.size()
      << "; generations=" << trajectory.gen_number.size() << '\n';
  out << "eval_index,candidate_id,generation,status,objective,running_best,"
         "generation_best,generation_median\n";
  std::size_t gen_row = 0;
  for (std::size_t i = 0; i < trajectory.eval_index.size(); ++i) {
    if (i > 0 && trajectory.generation[i] != trajectory.generation[i - 1]) {
      ++gen_row;
    }
    out << trajectory.eval_index[i] << ',' << trajectory.candidate_id[i] << ','
        << trajectory.generation[i] << ',' << to_string(trajectory.status[i])
        << ',' << format_sig17(trajectory.objective[i]) << ','
        << format_sig17(trajectory.running_best[i]) << ','
        << format_sig17(trajectory.gen_best[gen_row]) << ','
        << format_sig17(trajectory.gen_median[gen_row]) << '\n';
  }
  finish_table(out, path);
}

void write_density_report_csv(const std::string& path,
                              const std::string& source, const RunLog& log,
                              const DensityReport& report) {
  std::ofstream out = open_table(path);
  const Eigen::Index m =
      report.first_density.empty() ? 0 : report.first_density[0].mesh.size();
  out << "# genotype density; source=" << source << "; run_id=" << log.run_id
      << "; first_n=" << report.first_n << "; last_m=" << report.last_m
      << "; mesh=" << m << '\n';
  out << "mesh";
  for (const std::string& name : report.dim_names) {
    out << ",density_first_" << name << ",density_last_" << name;
  }
  out << '\n';
  for (Eigen::Index row = 0; row < m; ++row) {
    out << format_sig17(report.first_density[0].mesh[row]);
    for (std::size_t d = 0; d < report.dim_names.size(); ++d) {
      out << ',' << format_sig17(report.first_density[d].density[row]) << ','
          << format_sig17(report.last_density[d].density[row]);
    }
    out << '\n';
  }
  finish_table(out, path);
}

void write_error_density_csv(const std::string& path,
                             const std::vector<std::string>& sources,
                             const std::vector<ErrorDensityEntry>& entries,
                             double divergence_threshold) {
  std::ofstream out = open_table(path);
  out << "# objective density; sources=";
  for (std::size_t i = 0; i < sources.size(); ++i) {
    out << (i ? "|" : "") << sources[i];
  }
  out << "; divergence_threshold=" << format_sig17(divergence_threshold);
  for (const ErrorDensityEntry& entry : entries) {
    out << "; divergence_fraction_" << entry.run_id << '='
        << format_sig17(entry.divergence_fraction);
  }
  const Eigen::Index m = entries.empty() ? 0 : entries[0].density.mesh.size();
  out << "; mesh=" << m << '\n';
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out << (i ? "," : "") << "mesh_" << entries[i].run_id << ",density_"
        << entries[i].run_id;
  }
  out << '\n';
  for (Eigen::Index row = 0; row < m; ++row) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      out << (i ? "," : "") << format_sig17(entries[i].density.mesh[row])
          << ',' << format_sig17(entries[i].density.density[row]);
    }
    out << '\n';
  }
  finish_table(out, path);
}

}  // namespace hypertune
