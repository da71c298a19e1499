#include "optiq/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "optiq/diagnostics.hpp"
#include "optiq/version.hpp"

namespace optiq {
namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Vec parse_x0_list(const std::vector<double>& values) {
  Vec x(static_cast<Eigen::Index>(values.size()));
  for (size_t i = 0; i < values.size(); ++i) {
    x[static_cast<Eigen::Index>(i)] = values[i];
  }
  return x;
}

int env_thread_cap() {
  const char* raw = std::getenv("OPTIQ_THREADS");
  if (raw == nullptr) return 0;
  try {
    const int v = std::stoi(raw);
    return v > 0 ? v : 0;
  } catch (...) {
    return 0;
  }
}

SolverResult dispatch_solver(const std::string& solver,
                             const ObjectiveFunction& obj, const Vec& x0,
                             const SuiteSpec& spec) {
  if (solver == "optiq") {
    OptiQConfig cfg = spec.optiq;
    cfg.eta = spec.eta;
    cfg.max_iterations = spec.max_iterations;
    return solve(obj, x0, cfg);
  }
  if (solver == "newton") {
    return newton_damped_solve(obj, x0, spec.eta, spec.max_iterations,
                               spec.line_search);
  }
  if (solver == "bfgs") {
    return bfgs_solve(obj, x0, spec.eta, spec.max_iterations,
                      spec.line_search);
  }
  if (solver == "sr1") {
    return sr1_solve(obj, x0, spec.eta, spec.max_iterations, spec.line_search);
  }
  if (solver == "fe_fixed") {
    if (!(spec.fe_dt > 0.0)) {
      throw std::invalid_argument("fe_fixed requires fe_dt > 0 in the suite");
    }
    return forward_euler_solve(obj, x0, StepPolicy::Fixed, spec.fe_dt,
                               spec.eta, spec.max_iterations);
  }
  if (solver == "fe_bound") {
    return forward_euler_solve(obj, x0, StepPolicy::BoundBased, spec.fe_safety,
                               spec.eta, spec.max_iterations);
  }
  throw std::invalid_argument("unknown solver: " + solver);
}

std::string sanitize_filename(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') {
      c = '_';
    }
  }
  return out;
}

}  // namespace

bool is_known_solver(const std::string& name) {
  return name == "optiq" || name == "newton" || name == "bfgs" ||
         name == "sr1" || name == "fe_fixed" || name == "fe_bound";
}

SuiteSpec parse_suite(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("suite is not valid JSON: ") +
                                e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("suite must be an object");

  SuiteSpec spec;
  spec.eta = j.value("eta", 1e-12);
  spec.max_iterations = j.value("max_iterations", 10000);
  if (!(spec.eta > 0.0)) throw std::invalid_argument("eta must be > 0");
  if (spec.max_iterations <= 0) {
    throw std::invalid_argument("max_iterations must be > 0");
  }
  spec.fe_dt = j.value("fe_dt", 0.0);
  spec.fe_safety = j.value("fe_safety", 0.5);

  if (!j.contains("problems") || !j["problems"].is_array()) {
    throw std::invalid_argument("suite needs a problems array");
  }
  for (const json& p : j["problems"]) {
    ProblemSpec ps;
    if (p.is_string()) {
      ps.name = p.get<std::string>();
    } else if (p.is_object()) {
      if (!p.contains("name")) {
        throw std::invalid_argument("problem entry needs a name");
      }
      ps.name = p["name"].get<std::string>();
      ps.n = p.value("n", 0);
      if (p.contains("x0")) {
        ps.x0 = parse_x0_list(p["x0"].get<std::vector<double>>());
      }
    } else {
      throw std::invalid_argument("problem entries must be strings or objects");
    }
    spec.problems.push_back(std::move(ps));
  }

  if (!j.contains("solvers") || !j["solvers"].is_array()) {
    throw std::invalid_argument("suite needs a solvers array");
  }
  for (const json& s : j["solvers"]) {
    const std::string name = s.get<std::string>();
    if (!is_known_solver(name)) {
      throw std::invalid_argument("unknown solver: " + name);
    }
    spec.solvers.push_back(name);
  }
  if (spec.problems.empty()) {
    throw std::invalid_argument("suite needs at least one problem");
  }
  if (spec.solvers.empty()) {
    throw std::invalid_argument("suite needs at least one solver");
  }
  return spec;
}

SuiteSpec load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open suite file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_suite(buf.str());
}

BenchmarkReport run_suite(const SuiteSpec& spec, int parallelism,
                          const std::string& trace_dir) {
  // Validate every (problem, solver) combination up front: configuration
  // errors abort, run failures never do.
  for (const std::string& s : spec.solvers) {
    if (!is_known_solver(s)) {
      throw std::invalid_argument("unknown solver: " + s);
    }
    if (s == "fe_fixed" && !(spec.fe_dt > 0.0)) {
      throw std::invalid_argument("fe_fixed requires fe_dt > 0 in the suite");
    }
  }
  struct Job {
    ProblemSpec problem;
    std::string solver;
    ObjectiveFunction obj;
    Vec x0;
  };
  std::vector<Job> jobs;
  for (const ProblemSpec& p : spec.problems) {
    ObjectiveFunction obj = make_test_function(p.name, p.n);
    Vec x0 = p.x0.has_value() ? *p.x0 : default_start(p.name, p.n);
    if (x0.size() != obj.dimension) {
      throw std::invalid_argument("x0 dimension mismatch for " + p.name);
    }
    for (const std::string& s : spec.solvers) {
      jobs.push_back({p, s, obj, x0});
    }
  }

  int workers = parallelism <= 0 ? 1 : parallelism;
  const int cap = env_thread_cap();
  if (cap > 0) workers = std::min(workers, cap);
  workers = std::min<int>(workers, std::max<size_t>(jobs.size(), 1));

  std::vector<BenchRow> rows(jobs.size());
  std::vector<std::vector<TraceRecord>> traces(jobs.size());
  std::atomic<size_t> next{0};

  auto worker = [&]() {
    while (true) {
      const size_t idx = next.fetch_add(1);
      if (idx >= jobs.size()) break;
      const Job& job = jobs[idx];
      BenchRow row;
      row.problem = job.problem.name;
      row.n = job.obj.dimension;
      row.solver = job.solver;
      row.x0 = job.x0;
      row.wall_time_normalized = std::numeric_limits<double>::quiet_NaN();
      try {
        const SolverResult res = dispatch_solver(job.solver, job.obj, job.x0,
                                                 spec);
        row.status = to_string(res.status);
        row.iterations = res.iterations;
        row.wall_time_s = res.wall_time;
        row.f_final = res.f_final;
        row.grad_norm_final = res.grad_norm_final;
        row.factored_block_sizes = res.factored_block_sizes;
        traces[idx] = res.trace;
      } catch (const NumericalFailure&) {
        row.status = to_string(SolverStatus::NumericalFailure);
      }
      rows[idx] = std::move(row);
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  if (!trace_dir.empty()) {
    for (size_t i = 0; i < jobs.size(); ++i) {
      const std::string fname =
          trace_dir + "/" + sanitize_filename(rows[i].problem) + "_n" +
          std::to_string(rows[i].n) + "_" + sanitize_filename(rows[i].solver) +
          ".trace.json";
      std::ofstream out(fname, std::ios::binary);
      if (out) out << trace_to_json(traces[i]);
    }
  }

  std::sort(rows.begin(), rows.end(),
            [](const BenchRow& a, const BenchRow& b) {
              if (a.problem != b.problem) return a.problem < b.problem;
              if (a.n != b.n) return a.n < b.n;
              return a.solver < b.solver;
            });

  // Newton-normalized wall times, per problem instance; newton rows come
  // out as exactly 1.
  for (BenchRow& row : rows) {
    for (const BenchRow& ref : rows) {
      if (ref.solver == "newton" && ref.problem == row.problem &&
          ref.n == row.n && ref.wall_time_s > 0.0) {
        row.wall_time_normalized = row.wall_time_s / ref.wall_time_s;
        break;
      }
    }
  }

  BenchmarkReport report;
  report.rows = std::move(rows);
  report.eta = spec.eta;
  report.max_iterations = spec.max_iterations;
  report.parallelism = workers;
  report.version = kVersion;
  return report;
}

std::string report_to_csv(const BenchmarkReport& report) {
  std::string out =
      "problem,n,solver,status,iterations,wall_time_s,f_final,"
      "grad_norm_final\n";
  for (const BenchRow& r : report.rows) {
    out += r.problem;
    out += ',';
    out += std::to_string(r.n);
    out += ',';
    out += r.solver;
    out += ',';
    out += r.status;
    out += ',';
    out += std::to_string(r.iterations);
    out += ',';
    out += fmt_double(r.wall_time_s);
    out += ',';
    out += fmt_double(r.f_final);
    out += ',';
    out += fmt_double(r.grad_norm_final);
    out += '\n';
  }
  return out;
}

std::string report_to_json(const BenchmarkReport& report) {
  json rows = json::array();
  for (const BenchRow& r : report.rows) {
    json row = {
        {"problem", r.problem},
        {"n", r.n},
        {"solver", r.solver},
        {"status", r.status},
        {"iterations", r.iterations},
        {"wall_time_s", r.wall_time_s},
        {"f_final", r.f_final},
        {"grad_norm_final", r.grad_norm_final},
        {"factored_block_sizes", r.factored_block_sizes},
        {"x0", std::vector<double>(r.x0.data(), r.x0.data() + r.x0.size())},
    };
    if (std::isfinite(r.wall_time_normalized)) {
      row["wall_time_normalized"] = r.wall_time_normalized;
    }
    rows.push_back(std::move(row));
  }
  const json doc = {
      {"metadata",
       {
           {"eta", report.eta},
           {"max_iterations", report.max_iterations},
           {"parallelism", report.parallelism},
           {"version", report.version},
       }},
      {"rows", rows},
  };
  return doc.dump(2) + "\n";
}

void emit_report(const BenchmarkReport& report, const std::string& format,
                 const std::string& path) {
  std::string payload;
  if (format == "csv") {
    payload = report_to_csv(report);
  } else if (format == "json") {
    payload = report_to_json(report);
  } else {
    throw std::invalid_argument("format must be csv or json");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write report to " + path);
  out << payload;
}

std::string trace_to_json(const std::vector<TraceRecord>& trace) {
  json arr = json::array();
  for (const TraceRecord& rec : trace) {
    arr.push_back({
        {"iteration", rec.iteration},
        {"t", rec.t},
        {"dt", rec.dt},
        {"f_value", rec.f_value},
        {"grad_norm", rec.grad_norm},
        {"quiescent_count", rec.quiescent_count},
        {"promoted_count", rec.promoted_count},
        {"demoted_count", rec.demoted_count},
        {"safeguarded", rec.safeguarded},
        {"lyapunov", rec.lyapunov},
    });
  }
  return arr.dump(2) + "\n";
}

namespace {

Vec resolve_x0(const std::string& problem, int n,
               const std::vector<double>& x0_values) {
  if (x0_values.empty()) return default_start(problem, n);
  return parse_x0_list(x0_values);
}

int cmd_solve(const std::string& problem, int n,
              const std::vector<double>& x0_values, const std::string& solver,
              double eta, int max_iters, const std::string& trace_path,
              double fe_dt, double fe_safety) {
  const ObjectiveFunction obj = make_test_function(problem, n);
  const Vec x0 = resolve_x0(problem, n, x0_values);
  if (x0.size() != obj.dimension) {
    throw std::invalid_argument("x0 dimension mismatch");
  }
  SuiteSpec one;
  one.eta = eta;
  one.max_iterations = max_iters;
  one.fe_dt = fe_dt;
  one.fe_safety = fe_safety;
  const SolverResult res = dispatch_solver(solver, obj, x0, one);

  std::cout << "problem: " << problem << "\n";
  std::cout << "solver: " << solver << "\n";
  std::cout << "status: " << to_string(res.status) << "\n";
  std::cout << "iterations: " << res.iterations << "\n";
  std::cout << "f_final: " << fmt_double(res.f_final) << "\n";
  std::cout << "grad_norm_final: " << fmt_double(res.grad_norm_final) << "\n";
  std::cout << "x_final:";
  for (Eigen::Index i = 0; i < res.x_final.size() && i < 8; ++i) {
    std::cout << ' ' << fmt_double(res.x_final[i]);
  }
  if (res.x_final.size() > 8) std::cout << " ...";
  std::cout << "\n";
  if (!trace_path.empty()) {
    std::ofstream out(trace_path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write trace to " + trace_path);
    out << trace_to_json(res.trace);
  }
  return res.status == SolverStatus::Converged ? 0 : 1;
}

int cmd_bench(const std::string& suite_path, const std::string& out_path,
              const std::string& format, int parallel,
              const std::string& trace_dir) {
  const SuiteSpec spec = load_suite(suite_path);
  const BenchmarkReport report = run_suite(spec, parallel, trace_dir);
  emit_report(report, format, out_path);
  bool all_ok = true;
  for (const BenchRow& r : report.rows) {
    if (r.status != to_string(SolverStatus::Converged)) all_ok = false;
  }
  std::cout << "rows: " << report.rows.size() << "\n";
  std::cout << "out: " << out_path << "\n";
  return all_ok ? 0 : 1;
}

int cmd_diagnose(const std::string& problem, int n,
                 const std::vector<double>& x0_values) {
  const ObjectiveFunction obj = make_test_function(problem, n);
  const Vec x0 = resolve_x0(problem, n, x0_values);
  if (x0.size() != obj.dimension) {
    throw std::invalid_argument("x0 dimension mismatch");
  }
  const Vec g = obj.gradient(x0);
  const Mat H = obj.hessian(x0);
  const Vec xdot = -g;

  std::cout << "problem: " << problem << "\n";
  std::cout << "n: " << obj.dimension << "\n";
  std::cout << "f: " << fmt_double(obj.value(x0)) << "\n";
  std::cout << "grad_norm: " << fmt_double(g.norm()) << "\n";
  std::cout << "lyapunov: " << fmt_double(lyapunov_value(xdot)) << "\n";

  const FeBound bound = fe_stability_bound(obj, x0);
  if (bound.applicable) {
    std::cout << "fe_bound: " << fmt_double(bound.value) << "\n";
  } else {
    std::cout << "fe_bound: not_applicable\n";
  }

  const Vec xddot = -(H * xdot);
  const std::vector<TimeConstant> tau =
      estimate_time_constants(xdot, xddot, OptiQConfig{}.velocity_floor);
  std::cout << "time_constants:";
  for (const TimeConstant& tc : tau) {
    if (tc.admissible) {
      std::cout << ' ' << fmt_double(tc.value);
    } else {
      std::cout << " inadmissible";
    }
  }
  std::cout << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"OptiQ quiescence optimizer and benchmark harness"};
  app.require_subcommand(1);

  std::string problem, solver = "optiq", trace_path, suite_path, out_path;
  std::string format = "csv", trace_dir;
  std::vector<double> x0_values;
  int n = 0, max_iters = 1000, parallel = 1;
  double eta = 1e-12, fe_dt = 0.0, fe_safety = 0.5;

  CLI::App* solve_cmd =
      app.add_subcommand("solve", "Run one solver on one problem");
  solve_cmd->add_option("--problem", problem, "Test function name")
      ->required();
  solve_cmd->add_option("--n", n, "Dimension (scalable functions)");
  solve_cmd->add_option("--x0", x0_values,
                        "Start point (comma separated)")
      ->delimiter(',');
  solve_cmd->add_option("--solver", solver,
                        "optiq|newton|bfgs|sr1|fe_fixed|fe_bound");
  solve_cmd->add_option("--eta", eta, "Tolerance on ||grad||^2");
  solve_cmd->add_option("--max-iters", max_iters, "Iteration cap");
  solve_cmd->add_option("--trace", trace_path, "Write the trace JSON here");
  solve_cmd->add_option("--fe-dt", fe_dt, "Fixed step for fe_fixed");
  solve_cmd->add_option("--fe-safety", fe_safety,
                        "Safety factor for fe_bound");

  CLI::App* bench_cmd = app.add_subcommand("bench", "Run a suite file");
  bench_cmd->add_option("--suite", suite_path, "Suite JSON path")->required();
  bench_cmd->add_option("--out", out_path, "Report output path")->required();
  bench_cmd->add_option("--format", format, "csv|json");
  bench_cmd->add_option("--parallel", parallel, "Worker count");
  bench_cmd->add_option("--traces", trace_dir,
                        "Directory for per-run trace JSON");

  CLI::App* diag_cmd =
      app.add_subcommand("diagnose", "Print stability data at a point");
  diag_cmd->add_option("--problem", problem, "Test function name")->required();
  diag_cmd->add_option("--n", n, "Dimension (scalable functions)");
  diag_cmd->add_option("--x0", x0_values, "Point (comma separated)")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (solve_cmd->parsed()) {
      if (!is_known_solver(solver)) {
        throw std::invalid_argument("unknown solver: " + solver);
      }
      return cmd_solve(problem, n, x0_values, solver, eta, max_iters,
                       trace_path, fe_dt, fe_safety);
    }
    if (bench_cmd->parsed()) {
      if (format != "csv" && format != "json") {
        throw std::invalid_argument("format must be csv or json");
      }
      return cmd_bench(suite_path, out_path, format, parallel, trace_dir);
    }
    if (diag_cmd->parsed()) {
      return cmd_diagnose(problem, n, x0_values);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace optiq
