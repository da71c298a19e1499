#pragma once

#include <optional>
#include <string>
#include <vector>

#include "optiq/baselines.hpp"
#include "optiq/objective.hpp"
#include "optiq/quiescence.hpp"
#include "optiq/types.hpp"

namespace optiq {

// Solver names accepted by the harness: optiq, newton, bfgs, sr1,
// fe_fixed, fe_bound.
bool is_known_solver(const std::string& name);

struct ProblemSpec {
  std::string name;
  int n = 0;  // 0 = function's own default dimension
  std::optional<Vec> x0;
};

struct SuiteSpec {
  double eta = 1e-12;
  int max_iterations = 10000;
  std::vector<ProblemSpec> problems;
  std::vector<std::string> solvers;
  double fe_dt = 0.0;       // step for fe_fixed (required when requested)
  double fe_safety = 0.5;   // safety factor for fe_bound
  OptiQConfig optiq;        // eta/max_iterations overridden per run
  LineSearchConfig line_search;
};

// Parses the flat JSON suite format (see README). Throws
// std::invalid_argument on malformed input.
SuiteSpec load_suite(const std::string& path);
SuiteSpec parse_suite(const std::string& json_text);

struct BenchRow {
  std::string problem;
  int n = 0;
  std::string solver;
  std::string status;
  int iterations = 0;
  double wall_time_s = 0.0;
  double f_final = 0.0;
  double grad_norm_final = 0.0;
  std::vector<int> factored_block_sizes;
  Vec x0;
  // wall_time / wall_time(newton) for the same problem; NaN when absent.
  double wall_time_normalized = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchRow> rows;  // sorted by (problem, n, solver)
  double eta = 0.0;
  int max_iterations = 0;
  int parallelism = 1;
  std::string version;
};

// Runs the cross product problems x solvers. Individual failures become rows
// with their status, never abort the suite. parallelism 0 or 1 = serial;
// the OPTIQ_THREADS environment variable caps the worker count. Pass a
// trace_dir to persist each run's trace as JSON.
BenchmarkReport run_suite(const SuiteSpec& spec, int parallelism = 1,
                          const std::string& trace_dir = "");

// CSV columns exactly:
// problem,n,solver,status,iterations,wall_time_s,f_final,grad_norm_final
// Floats at 17 significant digits, LF newlines.
std::string report_to_csv(const BenchmarkReport& report);
std::string report_to_json(const BenchmarkReport& report);

void emit_report(const BenchmarkReport& report, const std::string& format,
                 const std::string& path);

std::string trace_to_json(const std::vector<TraceRecord>& trace);

// solve / bench / diagnose subcommands; returns the process exit code
// (0 success, 1 failed run, 2 configuration error).
int cli_main(int argc, char** argv);

}  // namespace optiq
