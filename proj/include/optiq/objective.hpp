#pragma once

#include <functional>
#include <string>
#include <vector>

#include "optiq/types.hpp"

namespace optiq {

// Objective with value, gradient and (symmetric) Hessian evaluators.
// Evaluation is pure: safe to call from multiple threads.
struct ObjectiveFunction {
  std::string name;
  int dimension = 0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
};

// Built-in test functions. Fixed-dimension functions ignore n; extended_wood
// needs n divisible by 4, least_squares_synthetic needs even n.
// Names: quadratic_example, booth, three_hump, himmelblau, rosenbrock,
// extended_wood, least_squares_synthetic.
// Throws std::invalid_argument for unknown names or invalid n.
ObjectiveFunction make_test_function(const std::string& name, int n = 0);

// Conventional start point for a built-in function (tiled for the scalable
// ones). Throws std::invalid_argument like make_test_function.
Vec default_start(const std::string& name, int n = 0);

std::vector<std::string> test_function_names();

// Least-squares objective f(x) = ||r(x)||^2 from a residual and its Jacobian.
// gradient = 2 J^T r; Hessian = 2 J^T J + 2 sum_i r_i * D2r_i. When
// residual_hessians is empty the second-order terms use central finite
// differences of the Jacobian (h = 1e-6*(1+|x_j|)); the result is
// symmetrized either way.
ObjectiveFunction make_least_squares(
    int n, int m, std::function<Vec(const Vec&)> residual,
    std::function<Mat(const Vec&)> jacobian,
    std::vector<std::function<Mat(const Vec&)>> residual_hessians = {});

}  // namespace optiq
