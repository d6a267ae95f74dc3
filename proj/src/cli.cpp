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

#include "hypertune/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hypertune/benchmark_evaluator.hpp"
#include "hypertune/cma.hpp"
#include "hypertune/eval.hpp"
#include "hypertune/param_space.hpp"
#include "hypertune/report.hpp"
#include "hypertune/rng.hpp"
#include "hypertune/run_log.hpp"
#include "hypertune/strategy.hpp"
#include "hypertune/subprocess.hpp"

namespace hypertune {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;  // I/O trouble or a failed bench property
constexpr int kExitConfig = 2;
constexpr int kExitCollapse = 3;

SearchSpace load_space(const std::string& arg) {
  constexpr const char kPrefix[] = "builtin:";
  if (arg.rfind(kPrefix, 0) == 0) {
    return builtin_space(arg.substr(sizeof(kPrefix) - 1));
  }
  std::ifstream in(arg);
  if (!in) {
    throw std::invalid_argument("cannot read space file '" + arg + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_space(text.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("space file '" + arg + "': " + e.what());
  }
}

std::vector<std::string> split_command(const std::string& command) {
  std::istringstream in(command);
  std::vector<std::string> argv;
  std::string token;
  while (in >> token) argv.push_back(std::move(token));
  return argv;
}

// --evaluator accepts "builtin:NAME" or a whitespace-separated external
// command line. Builtin benchmarks are seeded with the run seed, so an
// external stub given the same seed reproduces the identical log.
std::unique_ptr<Evaluator> make_evaluator(const std::string& arg,
                                          const SearchSpace& space,
                                          std::uint64_t seed) {
  constexpr const char kPrefix[] = "builtin:";
  if (arg.rfind(kPrefix, 0) == 0) {
    const std::string name = arg.substr(sizeof(kPrefix) - 1);
    BenchmarkSpec spec;
    spec.name = name;
    spec.dim = space.dim_count();
    if (name == "noisy_sphere") spec.noise_sigma = 0.05;
    return std::make_unique<BenchmarkEvaluator>(std::move(spec), seed);
  }
  std::vector<std::string> argv = split_command(arg);
  if (argv.empty()) {
    throw std::invalid_argument("empty evaluator command");
  }
  return std::make_unique<ExternalEvaluator>(std::move(argv));
}

void parse_penalty(const std::string& arg, RunConfig& config) {
  if (arg == "worst") {
    config.failure_policy = FailurePolicyKind::kWorstOfGenerationPlusMargin;
    return;
  }
  constexpr const char kPrefix[] = "fixed:";
  if (arg.rfind(kPrefix, 0) == 0) {
    const std::string number = arg.substr(sizeof(kPrefix) - 1);
    std::size_t pos = 0;
    double value = 0;
    try {
      value = std::stod(number, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != number.size() || !std::isfinite(value)) {
      throw std::invalid_argument("bad fixed penalty '" + number + "'");
    }
    config.failure_policy = FailurePolicyKind::kFixedPenalty;
    config.fixed_penalty = value;
    return;
  }
  throw std::invalid_argument("penalty must be 'worst' or 'fixed:<value>'");
}

struct RunFlags {
  std::string space;
  std::string evaluator;
  std::string optimizer = "cma";
  int lambda = 30;
  int parallel = 1;
  std::int64_t max_evals = 0;
  double eval_budget_s = 3600.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string penalty = "worst";
};

int cmd_run(const RunFlags& flags) {
  SearchSpace space;
  std::unique_ptr<Evaluator> evaluator;
  RunConfig config;
  try {
    space = load_space(flags.space);
    config.lambda = flags.lambda;
    config.parallel = flags.parallel;
    config.max_evaluations = flags.max_evals;
    config.eval_budget_s = flags.eval_budget_s;
    config.seed = flags.seed;
    config.optimizer = flags.optimizer == "random" ? OptimizerKind::kRandomPrior
                                                   : OptimizerKind::kCma;
    parse_penalty(flags.penalty, config);
    validate_run_config(config);
    evaluator = make_evaluator(flags.evaluator, space, config.seed);
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    FileRecordSink sink(flags.out);
    const RunLog log = run_optimization(config, space, *evaluator, &sink);
    if (log.best_index < 0) {
      std::cerr << "run produced no successful evaluation\n";
      return kExitCollapse;
    }
    const EvaluationRecord& best =
        log.records[static_cast<std::size_t>(log.best_index)];
    std::cout << "run_id " << log.run_id << '\n';
    std::cout << "records " << log.records.size() << '\n';
    std::cout << "best_objective " << format_sig17(*best.objective) << '\n';
    std::cout << "best_candidate_id " << best.candidate.id << '\n';
    for (std::size_t d = 0; d < space.dims.size(); ++d) {
      std::cout << "best_param " << space.dims[d].name << ' '
                << format_sig17(best.phenotype[d]) << '\n';
    }
    return kExitOk;
  } catch (const GenerationCollapse& e) {
    std::cerr << "run aborted: " << e.what() << '\n';
    return kExitCollapse;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

struct ReportFlags {
  std::vector<std::string> logs;
  std::string out_dir;
  int first = 30;
  int last = 100;
  int mesh = 256;
  double divergence_threshold = 0.7;
};

int cmd_report(const ReportFlags& flags) {
  std::vector<RunLog> logs;
  std::vector<Trajectory> trajectories;
  std::vector<DensityReport> densities;
  std::vector<ErrorDensityEntry> entries;
  try {
    for (const std::string& path : flags.logs) {
      logs.push_back(read_run_log(path));
    }
    for (const RunLog& log : logs) {
      trajectories.push_back(best_so_far(log));
      densities.push_back(
          density_report(log, flags.first, flags.last, flags.mesh));
    }
    entries = error_density(logs, 5000, flags.divergence_threshold);
  } catch (const std::exception& e) {
    std::cerr << "report input error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    namespace fs = std::filesystem;
    fs::create_directories(flags.out_dir);
    const fs::path out_dir(flags.out_dir);
    for (std::size_t i = 0; i < logs.size(); ++i) {
      const std::string& source = flags.logs[i];
      const std::string& run_id = logs[i].run_id;
      write_trajectory_csv((out_dir / ("trajectory_" + run_id + ".csv")).string(),
                           source, logs[i], trajectories[i]);
      write_density_report_csv(
          (out_dir / ("genotype_density_" + run_id + ".csv")).string(), source,
          logs[i], densities[i]);
    }
    write_error_density_csv((out_dir / "objective_density.csv").string(),
                            flags.logs, entries, flags.divergence_threshold);
    for (const ErrorDensityEntry& entry : entries) {
      std::cout << "divergence_fraction " << entry.run_id << ' '
                << format_sig17(entry.divergence_fraction) << '\n';
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

struct BenchFlags {
  bool quick = false;
  std::uint64_t seed = 42;
  bool inject_broken_weights = false;
};

struct BenchOutcome {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Direct ask/evaluate/tell loop on a builtin benchmark; stops early once the
// target is reached. Exercises the optimizer math without the dispatch layer.
struct CmaRunResult {
  double best = std::numeric_limits<double>::infinity();
  std::int64_t evals = 0;
};

CmaRunResult run_cma_on_benchmark(const BenchmarkSpec& spec, int lambda,
                                  std::uint64_t seed, std::int64_t max_evals,
                                  double target) {
  const Benchmark bench(spec, seed);
  CmaState<double> state = init_cma_default<double>(spec.dim, lambda, seed);
  CmaRunResult result;
  while (result.evals < max_evals && !(result.best < target)) {
    std::vector<Candidate<double>> candidates = ask(state);
    std::vector<std::pair<Candidate<double>, double>> evaluations;
    evaluations.reserve(candidates.size());
    for (const Candidate<double>& c : candidates) {
      const BenchmarkResult r = bench.evaluate(c.id, c.genotype);
      evaluations.emplace_back(c, r.objective);
      result.best = std::min(result.best, r.objective);
      ++result.evals;
    }
    tell(state, evaluations);
  }
  return result;
}

BenchOutcome bench_sphere(const BenchFlags& flags) {
  const int seeds = flags.quick ? 5 : 20;
  const std::int64_t max_evals = flags.quick ? 2000 : 5000;
  const double target = flags.quick ? 1e-8 : 1e-10;
  const int required = flags.quick ? seeds : seeds - 1;

  BenchmarkSpec spec;
  spec.name = "sphere";
  spec.dim = 10;
  int converged = 0;
  double worst = 0.0;
  for (int k = 0; k < seeds; ++k) {
    const CmaRunResult r = run_cma_on_benchmark(
        spec, 10, derive_seed(flags.seed, 100 + static_cast<std::uint64_t>(k)),
        max_evals, target);
    if (r.best < target) ++converged;
    worst = std::max(worst, r.best);
  }
  BenchOutcome out;
  out.name = "sphere_convergence";
  out.pass = converged >= required;
  out.detail = "converged=" + std::to_string(converged) + "/" +
               std::to_string(seeds) + " worst_best=" + format_sig17(worst);
  return out;
}

BenchOutcome bench_rastrigin(const BenchFlags& flags) {
  const int seeds = 3;
  const std::int64_t max_evals = flags.quick ? 3000 : 6000;
  // Multimodal landscape: require at least one of three seeds to get within
  // a few local basins of the global optimum (each missed coordinate costs
  // about one unit of objective).
  const double target = 3.0;

  BenchmarkSpec spec;
  spec.name = "rastrigin";
  spec.dim = 5;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < seeds; ++k) {
    const CmaRunResult r = run_cma_on_benchmark(
        spec, 20, derive_seed(flags.seed, 200 + static_cast<std::uint64_t>(k)),
        max_evals, target);
    best = std::min(best, r.best);
  }
  BenchOutcome out;
  out.name = "rastrigin_convergence";
  out.pass = best < target;
  out.detail = "best=" + format_sig17(best);
  return out;
}

// Runs two CMA-ES streams from the same seed against objective f and a
// monotone/scaled variant g; the candidate sequences must stay identical.
template <typename F, typename G>
bool paired_streams_identical(int dim, int lambda, std::uint64_t seed,
                              int generations, F f, G g) {
  CmaState<double> a = init_cma_default<double>(dim, lambda, seed);
  CmaState<double> b = init_cma_default<double>(dim, lambda, seed);
  for (int gen = 0; gen < generations; ++gen) {
    std::vector<Candidate<double>> ca = ask(a);
    std::vector<Candidate<double>> cb = ask(b);
    for (int i = 0; i < lambda; ++i) {
      const auto& ga = ca[static_cast<std::size_t>(i)].genotype;
      const auto& gb = cb[static_cast<std::size_t>(i)].genotype;
      if ((ga.array() != gb.array()).any()) return false;
    }
    std::vector<std::pair<Candidate<double>, double>> ea, eb;
    for (int i = 0; i < lambda; ++i) {
      const auto& cand_a = ca[static_cast<std::size_t>(i)];
      const auto& cand_b = cb[static_cast<std::size_t>(i)];
      ea.emplace_back(cand_a, f(cand_a.genotype));
      eb.emplace_back(cand_b, g(cand_b.genotype));
    }
    tell(a, ea);
    tell(b, eb);
  }
  return true;
}

BenchOutcome bench_monotone_invariance(const BenchFlags& flags) {
  const int generations = flags.quick ? 30 : 100;
  const bool identical = paired_streams_identical(
      5, 8, derive_seed(flags.seed, 300), generations,
      [](const Eigen::VectorXd& x) { return rosenbrock(x); },
      [](const Eigen::VectorXd& x) { return std::log1p(rosenbrock(x)); });
  BenchOutcome out;
  out.name = "monotone_invariance";
  out.pass = identical;
  out.detail = std::string("identical=") + (identical ? "1" : "0") +
               " generations=" + std::to_string(generations);
  return out;
}

BenchOutcome bench_scale_invariance(const BenchFlags& flags) {
  const int generations = flags.quick ? 30 : 100;
  const bool identical = paired_streams_identical(
      5, 8, derive_seed(flags.seed, 400), generations,
      [](const Eigen::VectorXd& x) { return rosenbrock(x); },
      [](const Eigen::VectorXd& x) { return 1000.0 * rosenbrock(x); });
  BenchOutcome out;
  out.name = "scale_invariance";
  out.pass = identical;
  out.detail = std::string("identical=") + (identical ? "1" : "0") +
               " generations=" + std::to_string(generations);
  return out;
}

BenchOutcome bench_weight_normalization(const BenchFlags& flags) {
  StrategyParams<double> params = default_strategy_params<double>(19, 30);
  if (flags.inject_broken_weights) {
    // Test-only defect injection: scale the recombination weights without
    // renormalizing. The checks below must flag this.
    params.weights *= 1.07;
  }
  const double weight_sum = params.weights.sum();
  bool decreasing = true;
  for (Eigen::Index i = 0; i + 1 < params.weights.size(); ++i) {
    if (!(params.weights[i] > params.weights[i + 1])) decreasing = false;
  }
  const bool positive = (params.weights.array() > 0).all();
  const double mu_eff_check = 1.0 / params.weights.squaredNorm();
  const bool consistent =
      std::abs(params.mu_eff - mu_eff_check) <= 1e-9 * params.mu_eff;

  BenchOutcome out;
  out.name = "weight_normalization";
  out.pass = std::abs(weight_sum - 1.0) <= 1e-12 && decreasing && positive &&
             consistent;
  out.detail = "weight_sum=" + format_sig17(weight_sum) +
               " mu_eff=" + format_sig17(params.mu_eff);
  return out;
}

BenchOutcome bench_prior_identity(const BenchFlags& flags) {
  const std::uint64_t seed = derive_seed(flags.seed, 500);
  CmaState<double> state = init_cma_default<double>(19, 30, seed);
  const std::vector<Candidate<double>> gen0 = ask(state);
  const std::vector<Candidate<double>> prior = sample_prior<double>(19, 30, seed);
  bool identical = gen0.size() == prior.size();
  for (std::size_t i = 0; identical && i < gen0.size(); ++i) {
    identical =
        (gen0[i].pre_boundary.array() == prior[i].pre_boundary.array()).all();
  }
  BenchOutcome out;
  out.name = "prior_identity";
  out.pass = identical;
  out.detail = std::string("identical=") + (identical ? "1" : "0");
  return out;
}

int cmd_bench(const BenchFlags& flags) {
  std::vector<BenchOutcome> outcomes;
  outcomes.push_back(bench_weight_normalization(flags));
  outcomes.push_back(bench_prior_identity(flags));
  outcomes.push_back(bench_monotone_invariance(flags));
  outcomes.push_back(bench_scale_invariance(flags));
  outcomes.push_back(bench_sphere(flags));
  outcomes.push_back(bench_rastrigin(flags));

  int failed = 0;
  for (const BenchOutcome& o : outcomes) {
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << o.name << ' ' << o.detail
              << '\n';
  }
  std::cout << "RESULT pass=" << (outcomes.size() - static_cast<std::size_t>(failed))
            << " fail=" << failed << '\n';
  return failed == 0 ? kExitOk : kExitFailure;
}

int cmd_spaces(const std::string& tag) {
  if (tag.empty()) {
    for (const std::string& t : builtin_space_tags()) {
      const SearchSpace space = builtin_space(t);
      std::cout << t << " dims=" << space.dim_count() << '\n';
    }
    return kExitOk;
  }
  try {
    std::cout << serialize_space(builtin_space(tag));
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Parallel derivative-free hyperparameter tuning"};
  app.name("hypertune");
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "Run an optimization");
  run_cmd->add_option("--space", run_flags.space,
                      "Space file, or builtin:<tag>")->required();
  run_cmd->add_option("--evaluator", run_flags.evaluator,
                      "External command line, or builtin:<benchmark>")
      ->required();
  run_cmd->add_option("--optimizer", run_flags.optimizer, "cma or random")
      ->check(CLI::IsMember({"cma", "random"}));
  run_cmd->add_option("--lambda", run_flags.lambda, "Population size");
  run_cmd->add_option("--parallel", run_flags.parallel,
                      "Max evaluations in flight");
  run_cmd->add_option("--max-evals", run_flags.max_evals,
                      "Evaluation budget (whole generations)")->required();
  run_cmd->add_option("--eval-budget-s", run_flags.eval_budget_s,
                      "Per-evaluation time budget in seconds");
  run_cmd->add_option("--seed", run_flags.seed, "Run seed");
  run_cmd->add_option("--out", run_flags.out, "Run log path")->required();
  run_cmd->add_option("--penalty", run_flags.penalty,
                      "Failure penalty: worst or fixed:<value>");

  ReportFlags report_flags;
  CLI::App* report_cmd =
      app.add_subcommand("report", "Analyze run logs into CSV tables");
  report_cmd->add_option("--log", report_flags.logs, "Run log path(s)")
      ->required();
  report_cmd->add_option("--out", report_flags.out_dir, "Output directory")
      ->required();
  report_cmd->add_option("--first", report_flags.first,
                         "Early-window record count");
  report_cmd->add_option("--last", report_flags.last,
                         "Late-window record count");
  report_cmd->add_option("--mesh", report_flags.mesh,
                         "Genotype density mesh size");
  report_cmd->add_option("--divergence-threshold",
                         report_flags.divergence_threshold,
                         "Objective level counted as divergence");

  BenchFlags bench_flags;
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "Run the optimizer property suite");
  bench_cmd->add_flag("--quick", bench_flags.quick, "Reduced budgets");
  bench_cmd->add_option("--seed", bench_flags.seed, "Base seed");
  bench_cmd->add_flag("--inject-broken-weights",
                      bench_flags.inject_broken_weights)
      ->group("");  // test-only defect injection, hidden from help

  std::string spaces_tag;
  CLI::App* spaces_cmd =
      app.add_subcommand("spaces", "List builtin spaces or print one");
  spaces_cmd->add_option("tag", spaces_tag, "Builtin space tag to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (run_cmd->parsed()) return cmd_run(run_flags);
  if (report_cmd->parsed()) return cmd_report(report_flags);
  if (bench_cmd->parsed()) return cmd_bench(bench_flags);
  if (spaces_cmd->parsed()) return cmd_spaces(spaces_tag);
  return kExitConfig;
}

}  // namespace hypertune
