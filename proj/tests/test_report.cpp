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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hypertune/report.hpp"
#include "hypertune/rng.hpp"
#include "hypertune/run_log.hpp"

using namespace hypertune;

namespace {

SearchSpace unit_space(int dim) {
  SearchSpace s;
  for (int i = 0; i < dim; ++i) {
    ParamSpec d;
    d.name = "u" + std::to_string(i);
    d.kind = ParamKind::kLinear;
    d.a = 0;
    d.b = 1;
    d.lo = 0;
    d.hi = 1;
    s.dims.push_back(d);
  }
  return s;
}

EvaluationRecord make_record(std::int64_t id, std::int64_t generation,
                             int gen_index, EvalStatus status, double objective,
                             int dim = 2, double coord = 0.5) {
  EvaluationRecord r;
  r.candidate.id = id;
  r.candidate.generation = generation;
  r.candidate.gen_index = gen_index;
  r.candidate.genotype = Eigen::VectorXd::Constant(dim, coord);
  r.status = status;
  if (status == EvalStatus::kOk) {
    r.objective = objective;
  } else {
    r.error = "synthetic failure";
  }
  r.phenotype.assign(static_cast<std::size_t>(dim), coord);
  return r;
}

RunLog log_from_objectives(const std::vector<double>& objectives, int lambda) {
  RunLog log;
  log.space = unit_space(2);
  log.run_id = "rsynthetic";
  for (std::size_t i = 0; i < objectives.size(); ++i) {
    const bool ok = std::isfinite(objectives[i]);
    log.records.push_back(make_record(
        std::int64_t(i), std::int64_t(i) / lambda, int(i) % lambda,
        ok ? EvalStatus::kOk : EvalStatus::kFailed, objectives[i]));
  }
  return log;
}

struct TempFile {
  TempFile() {
    static int counter = 0;
    path = "/tmp/hypertune_report_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter++) + ".tmp";
  }
  ~TempFile() { std::remove(path.c_str()); }
  std::string path;
};

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(bool(in));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

const double kNan = std::nan("");

}  // namespace

TEST_CASE("running best is the prefix minimum over ok objectives") {
  const RunLog log = log_from_objectives({0.5, 0.4, 0.6, 0.3}, 4);
  const Trajectory t = best_so_far(log);
  CHECK(t.eval_index == std::vector<std::int64_t>{1, 2, 3, 4});
  CHECK(t.running_best == std::vector<double>{0.5, 0.4, 0.4, 0.3});
  CHECK(t.objective == std::vector<double>{0.5, 0.4, 0.6, 0.3});
  CHECK(t.gen_number == std::vector<std::int64_t>{0});
  CHECK(t.gen_best == std::vector<double>{0.3});
  CHECK(t.gen_median == std::vector<double>{0.45});
}

TEST_CASE("failures advance the index without touching the minimum") {
  const RunLog log = log_from_objectives({0.5, kNan, 0.7}, 3);
  const Trajectory t = best_so_far(log);
  CHECK(t.running_best == std::vector<double>{0.5, 0.5, 0.5});
  CHECK(std::isnan(t.objective[1]));
  CHECK(t.status[1] == EvalStatus::kFailed);
}

TEST_CASE("the running best is NaN until the first ok record") {
  const RunLog log = log_from_objectives({kNan, kNan, 0.4, 0.9}, 4);
  const Trajectory t = best_so_far(log);
  CHECK(std::isnan(t.running_best[0]));
  CHECK(std::isnan(t.running_best[1]));
  CHECK(t.running_best[2] == 0.4);
  CHECK(t.running_best[3] == 0.4);
}

TEST_CASE("records are ordered by candidate id, not file order") {
  RunLog log;
  log.space = unit_space(2);
  log.records.push_back(make_record(2, 0, 2, EvalStatus::kOk, 0.2));
  log.records.push_back(make_record(0, 0, 0, EvalStatus::kOk, 0.9));
  log.records.push_back(make_record(1, 0, 1, EvalStatus::kOk, 0.5));
  const Trajectory t = best_so_far(log);
  CHECK(t.candidate_id == std::vector<std::int64_t>{0, 1, 2});
  CHECK(t.running_best == std::vector<double>{0.9, 0.5, 0.2});
}

TEST_CASE("per-generation summaries") {
  const RunLog log =
      log_from_objectives({3.0, 1.0, 4.0, 2.0, 0.5, kNan, 0.7, 0.6}, 4);
  const Trajectory t = best_so_far(log);
  CHECK(t.gen_number == std::vector<std::int64_t>{0, 1});
  CHECK(t.gen_best == std::vector<double>{1.0, 0.5});
  CHECK(t.gen_median == std::vector<double>{2.5, 0.6});
}

TEST_CASE("a single ok record is a valid trajectory") {
  const RunLog log = log_from_objectives({1.25}, 1);
  const Trajectory t = best_so_far(log);
  CHECK(t.running_best == std::vector<double>{1.25});
  CHECK(t.gen_best == std::vector<double>{1.25});
  CHECK(t.gen_median == std::vector<double>{1.25});
}

TEST_CASE("trajectory input validation") {
  RunLog empty;
  empty.space = unit_space(2);
  CHECK_THROWS_AS(best_so_far(empty), std::invalid_argument);
  const RunLog no_ok = log_from_objectives({kNan, kNan}, 2);
  CHECK_THROWS_AS(best_so_far(no_ok), std::invalid_argument);
}

TEST_CASE("early and late genotype densities separate their modes") {
  RunLog log;
  log.space = unit_space(2);
  log.run_id = "rdensity";
  Rng rng(42);
  // first 30 records centered at 0.5, last 100 at 0.8
  for (int i = 0; i < 130; ++i) {
    const double center = i < 30 ? 0.5 : 0.8;
    const double sd = i < 30 ? 0.1 : 0.05;
    EvaluationRecord rec = make_record(i, i / 10, i % 10, EvalStatus::kOk, 0.1);
    for (int d = 0; d < 2; ++d) {
      rec.candidate.genotype[d] = std::clamp(center + sd * rng.normal(), 0.0, 1.0);
    }
    log.records.push_back(rec);
  }

  const DensityReport report = density_report(log, 30, 100, 256);
  REQUIRE(report.dim_names == std::vector<std::string>{"u0", "u1"});
  REQUIRE(report.first_density.size() == 2);
  REQUIRE(report.last_density.size() == 2);
  for (int d = 0; d < 2; ++d) {
    const auto& first = report.first_density[d];
    const auto& last = report.last_density[d];
    int arg_first = 0, arg_last = 0;
    for (int j = 1; j < first.density.size(); ++j) {
      if (first.density[j] > first.density[arg_first]) arg_first = j;
      if (last.density[j] > last.density[arg_last]) arg_last = j;
    }
    CHECK(first.mesh[arg_first] > 0.4);
    CHECK(first.mesh[arg_first] < 0.6);
    CHECK(last.mesh[arg_last] > 0.75);
    CHECK(last.mesh[arg_last] < 0.85);
  }
}

TEST_CASE("density report window validation") {
  const RunLog log = log_from_objectives(std::vector<double>(129, 0.5), 10);
  try {
    density_report(log, 30, 100, 256);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("insufficient records (129 < 130") !=
          std::string::npos);
  }
  CHECK_THROWS_AS(density_report(log, 4, 100, 256), std::invalid_argument);
  CHECK_THROWS_AS(density_report(log, 30, 4, 256), std::invalid_argument);

  RunLog bad = log_from_objectives(std::vector<double>(130, 0.5), 10);
  bad.records[7].candidate.genotype = Eigen::VectorXd::Constant(5, 0.5);
  CHECK_THROWS_AS(density_report(bad, 30, 100, 256), std::invalid_argument);
}

TEST_CASE("divergence fraction counts bad objectives and bad statuses") {
  SUBCASE("three of one hundred over the threshold") {
    std::vector<double> objectives(100, 0.02);
    objectives[10] = 0.9;
    objectives[50] = 0.9;
    objectives[90] = 0.9;
    RunLog log = log_from_objectives(objectives, 10);
    log.run_id = "rdiv";
    const auto entries = error_density({log}, 256, 0.7);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].run_id == "rdiv");
    CHECK(entries[0].divergence_fraction == 0.03);
  }
  SUBCASE("failed records are divergent regardless of threshold") {
    std::vector<double> objectives(10, 0.1);
    objectives[3] = kNan;
    objectives[7] = kNan;
    const RunLog log = log_from_objectives(objectives, 10);
    const auto entries = error_density({log}, 64, 0.7);
    CHECK(entries[0].divergence_fraction == 0.2);
  }
  SUBCASE("zero when nothing diverges") {
    const RunLog log = log_from_objectives(std::vector<double>(20, 0.5), 10);
    const auto entries = error_density({log}, 64, 0.7);
    CHECK(entries[0].divergence_fraction == 0.0);
  }
}

TEST_CASE("objective densities integrate to one over the padded window") {
  Rng rng(6);
  std::vector<double> a_obj(200), b_obj(200);
  for (int i = 0; i < 200; ++i) {
    a_obj[i] = 0.3 + 0.02 * rng.normal();
    b_obj[i] = 0.6 + 0.05 * rng.normal();
  }
  RunLog a = log_from_objectives(a_obj, 20);
  a.run_id = "ra";
  RunLog b = log_from_objectives(b_obj, 20);
  b.run_id = "rb";

  const auto entries = error_density({a, b}, 512, 0.7);
  REQUIRE(entries.size() == 2);
  for (const auto& entry : entries) {
    const auto& d = entry.density;
    const int m = int(d.mesh.size());
    const double dx = (d.mesh[m - 1] - d.mesh[0]) / double(m - 1);
    double acc = 0.5 * (d.density[0] + d.density[m - 1]);
    for (int j = 1; j < m - 1; ++j) acc += d.density[j];
    CHECK(std::abs(acc * dx - 1.0) < 1e-6);
  }
  // 5% padding on each side of the observed objective range
  const double a_min = *std::min_element(a_obj.begin(), a_obj.end());
  const double a_max = *std::max_element(a_obj.begin(), a_obj.end());
  const double pad = 0.05 * (a_max - a_min);
  CHECK(entries[0].density.mesh[0] == doctest::Approx(a_min - pad).epsilon(1e-12));
}

TEST_CASE("identical objectives get a unit-width window") {
  const RunLog log = log_from_objectives(std::vector<double>(10, 0.02), 10);
  const auto entries = error_density({log}, 64, 0.7);
  const auto& d = entries[0].density;
  CHECK(d.mesh[0] == doctest::Approx(-0.48).epsilon(1e-12));
  CHECK(d.mesh[d.mesh.size() - 1] == doctest::Approx(0.52).epsilon(1e-12));
}

TEST_CASE("error density input validation") {
  CHECK_THROWS_AS(error_density({}, 64, 0.7), std::invalid_argument);
  RunLog empty;
  empty.space = unit_space(2);
  empty.run_id = "rempty";
  CHECK_THROWS_AS(error_density({empty}, 64, 0.7), std::invalid_argument);
  // four ok records are not enough for a density
  const RunLog sparse = log_from_objectives({0.1, 0.2, 0.3, 0.4, kNan}, 5);
  CHECK_THROWS_AS(error_density({sparse}, 64, 0.7), std::invalid_argument);
}

TEST_CASE("format_sig17 keeps doubles faithful") {
  for (double v : {0.1, 1.0 / 3.0, 1e98, 6.1e-4, -0.25, 0.0}) {
    CHECK(std::strtod(format_sig17(v).c_str(), nullptr) == v);
  }
  CHECK(format_sig17(std::nan("")) == "nan");
  CHECK(format_sig17(0.5) == "0.5");
}

TEST_CASE("trajectory CSV layout") {
  const RunLog log = log_from_objectives({3.0, 1.0, kNan, 2.0, 0.5, 0.8}, 3);
  const Trajectory t = best_so_far(log);
  TempFile file;
  write_trajectory_csv(file.path, "unit-test", log, t);
  const auto lines = read_lines(file.path);
  REQUIRE(lines.size() == 2 + log.records.size());
  CHECK(lines[0].rfind("# best-so-far trajectory; source=unit-test", 0) == 0);
  CHECK(lines[0].find("run_id=rsynthetic") != std::string::npos);
  CHECK(lines[1] ==
        "eval_index,candidate_id,generation,status,objective,running_best,"
        "generation_best,generation_median");
  CHECK(lines[2] == "1,0,0,ok,3,3,1,2");
  CHECK(lines[4] == "3,2,0,failed,nan,1,1,2");
  // generation 1 rows switch to the second generation's summary columns:
  // ok objectives {2, 0.5, 0.8}, median 0.8
  CHECK(lines[5] == "4,3,1,ok,2,1,0.5,0.80000000000000004");
}

TEST_CASE("genotype density CSV layout") {
  RunLog log = log_from_objectives(std::vector<double>(40, 0.5), 10);
  Rng rng(3);
  for (auto& rec : log.records) {
    for (int d = 0; d < 2; ++d) rec.candidate.genotype[d] = rng.uniform();
  }
  const DensityReport report = density_report(log, 20, 20, 64);
  TempFile file;
  write_density_report_csv(file.path, "unit-test", log, report);
  const auto lines = read_lines(file.path);
  REQUIRE(lines.size() == 2 + 64);
  CHECK(lines[0].rfind("# genotype density; source=unit-test", 0) == 0);
  CHECK(lines[0].find("first_n=20; last_m=20; mesh=64") != std::string::npos);
  CHECK(lines[1] == "mesh,density_first_u0,density_last_u0,density_first_u1,"
                    "density_last_u1");
  // mesh column spans [0, 1]
  CHECK(lines[2].rfind("0,", 0) == 0);
  CHECK(lines.back().rfind("1,", 0) == 0);
}

TEST_CASE("objective density CSV layout") {
  Rng rng(9);
  std::vector<double> obj(50);
  for (auto& v : obj) v = 0.2 + 0.03 * rng.normal();
  RunLog a = log_from_objectives(obj, 10);
  a.run_id = "ra";
  RunLog b = log_from_objectives(obj, 10);
  b.run_id = "rb";
  const auto entries = error_density({a, b}, 64, 0.7);
  TempFile file;
  write_error_density_csv(file.path, {"log_a.jsonl", "log_b.jsonl"}, entries, 0.7);
  const auto lines = read_lines(file.path);
  REQUIRE(lines.size() == 2 + 64);
  CHECK(lines[0].rfind("# objective density; sources=log_a.jsonl|log_b.jsonl", 0) == 0);
  CHECK(lines[0].find("divergence_fraction_ra=0") != std::string::npos);
  CHECK(lines[0].find("mesh=64") != std::string::npos);
  CHECK(lines[1] == "mesh_ra,density_ra,mesh_rb,density_rb");
}

TEST_CASE("header and record lines have a frozen shape") {
  RunConfig config;
  SearchSpace space = unit_space(1);
  space.dims[0].name = "x";
  CHECK(header_line(config, space, "rX") ==
        "{\"config\":{\"eval_budget_s\":3600.0,\"failure_policy\":"
        "\"worst_of_generation\",\"fixed_penalty\":0.0,\"lambda\":30,"
        "\"max_evaluations\":0,\"optimizer\":\"cma\",\"parallel\":1,"
        "\"seed\":0},\"format\":\"hypertune-run-v1\",\"run_id\":\"rX\","
        "\"space\":[{\"a\":0.0,\"b\":1.0,\"hi\":1.0,\"integer_round\":false,"
        "\"kind\":\"linear\",\"lo\":0.0,\"name\":\"x\"}]}");

  EvaluationRecord ok = make_record(1, 3, 2, EvalStatus::kOk, 0.125, 2, 0.25);
  CHECK(record_line(ok) ==
        "{\"candidate_id\":1,\"gen_index\":2,\"generation\":3,"
        "\"genotype\":[0.25,0.25],\"objective\":0.125,"
        "\"phenotype\":[0.25,0.25],\"status\":\"ok\","
        "\"wall_seconds\":0.0,\"worker_slot\":0}");

  EvaluationRecord failed = make_record(4, 0, 0, EvalStatus::kFailed, 0.0, 1, 0.5);
  CHECK(record_line(failed) ==
        "{\"candidate_id\":4,\"error\":\"synthetic failure\",\"gen_index\":0,"
        "\"generation\":0,\"genotype\":[0.5],\"phenotype\":[0.5],"
        "\"status\":\"failed\",\"wall_seconds\":0.0,\"worker_slot\":0}");
}

TEST_CASE("normalize_record_line zeroes the scheduling metadata") {
  EvaluationRecord rec = make_record(9, 1, 4, EvalStatus::kOk, 2.5);
  rec.wall_seconds = 1.75;
  rec.worker_slot = 3;
  EvaluationRecord zeroed = rec;
  zeroed.wall_seconds = 0.0;
  zeroed.worker_slot = 0;
  CHECK(normalize_record_line(record_line(rec)) == record_line(zeroed));
  CHECK(normalize_record_line(record_line(zeroed)) == record_line(zeroed));
}

TEST_CASE("run logs round trip through the file sink") {
  RunConfig config;
  config.lambda = 4;
  config.parallel = 3;
  config.max_evaluations = 8;
  config.eval_budget_s = 12.5;
  config.seed = 77;
  config.failure_policy = FailurePolicyKind::kFixedPenalty;
  config.fixed_penalty = 9.5;
  config.optimizer = OptimizerKind::kRandomPrior;
  const SearchSpace space = builtin_space("mnist_adadelta");

  std::vector<EvaluationRecord> records;
  EvaluationRecord ok = make_record(0, 0, 0, EvalStatus::kOk, 0.5, 18, 0.25);
  ok.wall_seconds = 0.125;
  ok.worker_slot = 2;
  records.push_back(ok);
  records.push_back(make_record(1, 0, 1, EvalStatus::kFailed, 0.0, 18, 0.75));
  EvaluationRecord timeout = make_record(2, 0, 2, EvalStatus::kTimeout, 0.0, 18, 0.1);
  timeout.error = "";
  records.push_back(timeout);
  EvaluationRecord better = make_record(3, 1, 0, EvalStatus::kOk, 0.25, 18, 0.3);
  records.push_back(better);

  TempFile file;
  {
    FileRecordSink sink(file.path);
    sink.write_header(config, space, "rround");
    for (const auto& rec : records) sink.write_record(rec);
  }

  const RunLog back = read_run_log(file.path);
  CHECK(back.run_id == "rround");
  CHECK(back.config.lambda == 4);
  CHECK(back.config.parallel == 3);
  CHECK(back.config.max_evaluations == 8);
  CHECK(back.config.eval_budget_s == 12.5);
  CHECK(back.config.seed == 77);
  CHECK(back.config.failure_policy == FailurePolicyKind::kFixedPenalty);
  CHECK(back.config.fixed_penalty == 9.5);
  CHECK(back.config.optimizer == OptimizerKind::kRandomPrior);

  REQUIRE(back.space.dims.size() == space.dims.size());
  for (std::size_t i = 0; i < space.dims.size(); ++i) {
    CHECK(back.space.dims[i].name == space.dims[i].name);
    CHECK(back.space.dims[i].kind == space.dims[i].kind);
    CHECK(back.space.dims[i].a == space.dims[i].a);
    CHECK(back.space.dims[i].b == space.dims[i].b);
    CHECK(back.space.dims[i].integer_round == space.dims[i].integer_round);
    CHECK(back.space.dims[i].lo == space.dims[i].lo);
    CHECK(back.space.dims[i].hi == space.dims[i].hi);
  }

  REQUIRE(back.records.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(back.records[i].candidate.id == records[i].candidate.id);
    CHECK(back.records[i].candidate.generation == records[i].candidate.generation);
    CHECK(back.records[i].candidate.gen_index == records[i].candidate.gen_index);
    CHECK((back.records[i].candidate.genotype.array() ==
           records[i].candidate.genotype.array())
              .all());
    CHECK(back.records[i].status == records[i].status);
    CHECK(back.records[i].objective.has_value() ==
          records[i].objective.has_value());
    if (records[i].objective) {
      CHECK(*back.records[i].objective == *records[i].objective);
    }
    CHECK(back.records[i].error == records[i].error);
    CHECK(back.records[i].wall_seconds == records[i].wall_seconds);
    CHECK(back.records[i].worker_slot == records[i].worker_slot);
    CHECK(back.records[i].phenotype == records[i].phenotype);
  }
  CHECK(back.best_index == 3);  // objective 0.25 beats 0.5
}

TEST_CASE("read_run_log rejects damaged files") {
  CHECK_THROWS_AS(read_run_log("/nonexistent/run.jsonl"), std::runtime_error);

  TempFile empty;
  std::ofstream(empty.path).flush();
  CHECK_THROWS_AS(read_run_log(empty.path), std::runtime_error);

  TempFile bad_header;
  std::ofstream(bad_header.path) << "not json\n";
  CHECK_THROWS_AS(read_run_log(bad_header.path), std::runtime_error);

  TempFile wrong_format;
  std::ofstream(wrong_format.path) << "{\"format\":\"something-else\"}\n";
  CHECK_THROWS_AS(read_run_log(wrong_format.path), std::runtime_error);

  RunConfig config;
  const SearchSpace space = unit_space(1);
  TempFile bad_record;
  std::ofstream(bad_record.path)
      << header_line(config, space, "r") << "\nnot a record\n";
  try {
    read_run_log(bad_record.path);
    FAIL("expected runtime_error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}
