#pragma once

#include "optiq/objective.hpp"
#include "optiq/types.hpp"

namespace optiq {

// V(xdot) = 0.5 * ||xdot||^2.
double lyapunov_value(const Vec& xdot);

struct FeBound {
  double value = 0.0;     // 2 / lambda_max(hessian(x))
  bool applicable = false;  // false when lambda_max <= 0
};

FeBound fe_stability_bound(const ObjectiveFunction& obj, const Vec& x);

// Closed-form gradient-flow solution for f = 0.5 x'Qx + b'x (Q SPD):
// x(t) = x* + sum_i c_i exp(-lambda_i t) v_i with x* = -Q^{-1} b, via a
// full symmetric eigendecomposition. Ground truth for the integrator and
// the exact-landing tests.
Vec gradient_flow_oracle_quadratic(const Mat& Q, const Vec& b, const Vec& x0,
                                   double t);

enum class BoundFlag {
  Pass,
  PassEquality,  // single-cluster spectrum: dt matches 1/lambda
  Fail,
  NotChecked,  // safeguarded iteration or dt <= 0
};

// Annotates each quiescence-driven dt in a trace with whether
// 1/lambda_max <= dt <= (1/lambda_min)*(1+rtol) holds. Meaningful only for
// quadratic problems, where the linearization is exact.
std::vector<BoundFlag> step_bound_report(const std::vector<TraceRecord>& trace,
                                         double lambda_min, double lambda_max,
                                         double rtol = 1e-9);

}  // namespace optiq
