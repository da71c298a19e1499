#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "optiq/baselines.hpp"
#include "optiq/diagnostics.hpp"
#include "optiq/objective.hpp"
#include "optiq/quiescence.hpp"

namespace py = pybind11;

namespace {

using optiq::Mat;
using optiq::ObjectiveFunction;
using optiq::SolverResult;
using optiq::Vec;

py::dict result_to_dict(const SolverResult& res) {
  py::dict d;
  d["status"] = std::string(optiq::to_string(res.status));
  d["x"] = res.x_final;
  d["f_final"] = res.f_final;
  d["grad_norm_final"] = res.grad_norm_final;
  d["iterations"] = res.iterations;
  d["t_final"] = res.t_final;
  d["wall_time"] = res.wall_time;

  std::vector<double> dts, lyapunov;
  std::vector<int> quiescent_counts;
  std::vector<bool> safeguarded;
  dts.reserve(res.trace.size());
  for (const auto& rec : res.trace) {
    dts.push_back(rec.dt);
    lyapunov.push_back(rec.lyapunov);
    quiescent_counts.push_back(rec.quiescent_count);
    safeguarded.push_back(rec.safeguarded);
  }
  d["dts"] = dts;
  d["lyapunov"] = lyapunov;
  d["quiescent_counts"] = quiescent_counts;
  d["safeguarded"] = safeguarded;
  d["factored_block_sizes"] = res.factored_block_sizes;
  return d;
}

Vec resolve_start(const std::string& problem, int n,
                  const std::optional<Vec>& x0) {
  if (x0.has_value()) return *x0;
  return optiq::default_start(problem, n);
}

SolverResult dispatch(const std::string& solver, const ObjectiveFunction& obj,
                      const Vec& x0, double eta, int max_iterations,
                      double fe_dt, double fe_safety) {
  if (solver == "optiq") {
    optiq::OptiQConfig cfg;
    cfg.eta = eta;
    cfg.max_iterations = max_iterations;
    return optiq::solve(obj, x0, cfg);
  }
  if (solver == "newton") {
    return optiq::newton_damped_solve(obj, x0, eta, max_iterations);
  }
  if (solver == "bfgs") {
    return optiq::bfgs_solve(obj, x0, eta, max_iterations);
  }
  if (solver == "sr1") {
    return optiq::sr1_solve(obj, x0, eta, max_iterations);
  }
  if (solver == "fe_fixed") {
    if (!(fe_dt > 0.0)) {
      throw std::invalid_argument("fe_fixed requires fe_dt > 0");
    }
    return optiq::forward_euler_solve(obj, x0, optiq::StepPolicy::Fixed, fe_dt,
                                      eta, max_iterations);
  }
  if (solver == "fe_bound") {
    return optiq::forward_euler_solve(obj, x0, optiq::StepPolicy::BoundBased,
                                      fe_safety, eta, max_iterations);
  }
  throw std::invalid_argument("unknown solver: " + solver);
}

}  // namespace

PYBIND11_MODULE(_optiq, m) {
  m.doc() = "Quiescence-sequencing optimizer with second-order baselines";
  m.attr("__version__") = "0.1.0";

  py::class_<ObjectiveFunction>(m, "TestFunction")
      .def(py::init([](const std::string& name, int n) {
             return optiq::make_test_function(name, n);
           }),
           py::arg("name"), py::arg("n") = 0)
      .def_readonly("name", &ObjectiveFunction::name)
      .def_readonly("dimension", &ObjectiveFunction::dimension)
      .def(
          "value",
          [](const ObjectiveFunction& f, const Vec& x) { return f.value(x); },
          py::arg("x"))
      .def(
          "gradient",
          [](const ObjectiveFunction& f, const Vec& x) {
            return f.gradient(x);
          },
          py::arg("x"))
      .def(
          "hessian",
          [](const ObjectiveFunction& f, const Vec& x) {
            return f.hessian(x);
          },
          py::arg("x"));

  m.def("test_function_names", &optiq::test_function_names,
        "Names of the built-in test functions");

  m.def("default_start", &optiq::default_start, py::arg("name"),
        py::arg("n") = 0, "Conventional start point for a test function");

  m.def(
      "solve",
      [](const std::string& problem, std::optional<Vec> x0, int n,
         const std::string& solver, double eta, int max_iterations,
         double fe_dt, double fe_safety) {
        const ObjectiveFunction obj = optiq::make_test_function(problem, n);
        const Vec start = resolve_start(problem, n, x0);
        if (start.size() != obj.dimension) {
          throw std::invalid_argument("x0 dimension mismatch");
        }
        return result_to_dict(
            dispatch(solver, obj, start, eta, max_iterations, fe_dt,
                     fe_safety));
      },
      py::arg("problem"), py::kw_only(), py::arg("x0") = std::nullopt,
      py::arg("n") = 0, py::arg("solver") = "optiq", py::arg("eta") = 1e-12,
      py::arg("max_iterations") = 1000, py::arg("fe_dt") = 0.0,
      py::arg("fe_safety") = 0.5,
      "Run one solver on one test function; returns a result dict");

  m.def(
      "fe_stability_bound",
      [](const std::string& problem, std::optional<Vec> x,
         int n) -> py::object {
        const ObjectiveFunction obj = optiq::make_test_function(problem, n);
        const Vec at = resolve_start(problem, n, x);
        const optiq::FeBound bound = optiq::fe_stability_bound(obj, at);
        if (!bound.applicable) return py::none();
        return py::float_(bound.value);
      },
      py::arg("problem"), py::kw_only(), py::arg("x") = std::nullopt,
      py::arg("n") = 0,
      "Largest stable explicit-Euler step 2/lambda_max, or None when the "
      "Hessian has no positive eigenvalue");

  m.def(
      "reference_trajectory",
      [](const std::string& problem, double t_end, std::optional<Vec> x0,
         int n, double rel_tol, double abs_tol) {
        const ObjectiveFunction obj = optiq::make_test_function(problem, n);
        const Vec start = resolve_start(problem, n, x0);
        if (start.size() != obj.dimension) {
          throw std::invalid_argument("x0 dimension mismatch");
        }
        const optiq::IntegrationResult res =
            optiq::reference_integrate(obj, start, t_end, rel_tol, abs_tol);
        const auto rows = static_cast<Eigen::Index>(res.samples.size());
        Vec t(rows);
        Mat x(rows, start.size());
        for (Eigen::Index i = 0; i < rows; ++i) {
          t[i] = res.samples[static_cast<size_t>(i)].t;
          x.row(i) = res.samples[static_cast<size_t>(i)].x;
        }
        py::dict d;
        d["status"] = std::string(optiq::to_string(res.status));
        d["t"] = t;
        d["x"] = x;
        d["steps_accepted"] = res.steps_accepted;
        d["steps_rejected"] = res.steps_rejected;
        return d;
      },
      py::arg("problem"), py::arg("t_end"), py::kw_only(),
      py::arg("x0") = std::nullopt, py::arg("n") = 0,
      py::arg("rel_tol") = 1e-8, py::arg("abs_tol") = 1e-10,
      "Integrate the gradient flow with the adaptive reference integrator");
}
