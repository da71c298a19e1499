#pragma once

#include "optiq/objective.hpp"
#include "optiq/types.hpp"

namespace optiq {

struct LineSearchConfig {
  double c1 = 1e-4;
  double shrink = 0.5;
  double alpha0 = 1.0;
  int max_backtracks = 60;
};

struct ArmijoResult {
  double alpha = 0.0;
  bool success = false;
  int backtracks = 0;
};

// First alpha in {alpha0, alpha0*shrink, ...} satisfying
// f(x + alpha d) <= fx + c1 * alpha * gx.dot(d). Fails (success = false)
// when max_backtracks is exhausted or d is not a descent direction.
ArmijoResult armijo_backtrack(const ObjectiveFunction& obj, const Vec& x,
                              double fx, const Vec& gx, const Vec& direction,
                              const LineSearchConfig& cfg = {});

// Newton with dense factorization each iteration; falls back to -grad when
// the Hessian solve fails or yields a non-descent direction. Armijo steps.
SolverResult newton_damped_solve(const ObjectiveFunction& obj, const Vec& x0,
                                 double eta, int max_iterations,
                                 const LineSearchConfig& ls = {});

// Inverse-Hessian BFGS, identity start; update skipped when
// y.s <= 1e-10 ||y|| ||s||; estimate reset to identity if the direction
// stops being descent.
SolverResult bfgs_solve(const ObjectiveFunction& obj, const Vec& x0,
                        double eta, int max_iterations,
                        const LineSearchConfig& ls = {});

// SR1 Hessian estimate, identity start; update skipped when
// |(y-Hs).s| <= 1e-8 ||s|| ||y-Hs||; direction through the same factor-or-
// steepest-descent fallback as Newton.
SolverResult sr1_solve(const ObjectiveFunction& obj, const Vec& x0, double eta,
                       int max_iterations, const LineSearchConfig& ls = {});

// One BFGS inverse-estimate update; returns false (B untouched) when the
// curvature guard skips it. Exposed for direct property tests.
bool bfgs_update(Mat& B, const Vec& s, const Vec& y);

// One SR1 Hessian-estimate update with its skip rule.
bool sr1_update(Mat& H, const Vec& s, const Vec& y);

enum class StepPolicy {
  Fixed,       // dt_or_safety is the step
  BoundBased,  // dt = dt_or_safety * 2/lambda_max, re-evaluated per iteration
};

// Explicit forward-Euler on xdot = -grad f. Diverged when |f| or ||x||
// exceeds 1e12 or goes non-finite.
SolverResult forward_euler_solve(const ObjectiveFunction& obj, const Vec& x0,
                                 StepPolicy policy, double dt_or_safety,
                                 double eta, int max_iterations);

struct TrajectoryPoint {
  double t = 0.0;
  Vec x;
};

struct IntegrationResult {
  SolverStatus status = SolverStatus::NumericalFailure;
  std::vector<TrajectoryPoint> samples;  // accepted steps, including t = 0
  int steps_accepted = 0;
  int steps_rejected = 0;
};

// Adaptive embedded Runge-Kutta 2(3) (Bogacki-Shampine) on xdot = -grad f,
// PI step control with a mixed rel/abs error norm. NumericalFailure when the
// step size underflows below 1e-14.
IntegrationResult reference_integrate(const ObjectiveFunction& obj,
                                      const Vec& x0, double t_end,
                                      double rel_tol = 1e-8,
                                      double abs_tol = 1e-10);

}  // namespace optiq
