#pragma once

#include "optiq/linalg.hpp"
#include "optiq/objective.hpp"
#include "optiq/types.hpp"

namespace optiq {

struct OptiQConfig {
  // Convergence tolerance on the squared gradient norm ||grad f||^2.
  double eta = 1e-12;
  int max_iterations = 1000;
  // Relative tolerance for grouping equal time constants into one promotion.
  double tau_grouping_rtol = 1e-9;
  // Variables with |xdot_i| below this are excluded from promotion.
  double velocity_floor = 1e-14;
  // Initial diagonal shift when the quiescent block fails to factor.
  double regularization_seed = 1e-10;
  // De-quiescence: a quiescent variable is demoted when its gradient moves
  // away from the one-step linear prediction by more than
  // max(eta/max_iterations, dequiescence_rtol * ||grad||_inf) ...
  double dequiescence_rtol = 1e-2;
  // ... or when its own gradient grows past this fraction of ||grad||_inf
  // (a quiescent variable is supposed to sit at its conditional equilibrium).
  double quiescent_gradient_ratio = 0.5;
};

// Throws std::invalid_argument when a field is out of range.
void validate(const OptiQConfig& config);

struct TimeConstant {
  double value = 0.0;
  bool admissible = false;
};

struct QuiescenceStep {
  double dt = 0.0;
  IndexList promoted;  // global variable indices entering quiescence
  Vec xdot_nq;
  Vec xdot_q;
  std::vector<TimeConstant> tau_tilde;
};

struct Dynamics {
  Vec xdot_nq;   // -grad_nq
  Vec xddot_nq;  // -(H_nq,nq * xdot_nq + H_nq,q * xdot_q)
};

// Gradient-flow velocity and acceleration of the non-quiescent variables.
// xdot_q is the current quiescent velocity (empty when Q is empty).
// Throws NumericalFailure on non-finite gradient/Hessian entries.
Dynamics nonquiescent_dynamics(const Vec& g, const Mat& H,
                               const IndexList& q_idx, const IndexList& nq_idx,
                               const Vec& xdot_q);

// tau_i = -xdot_i / xddot_i. Entries with |xdot_i| < velocity_floor,
// xddot_i == 0, or tau <= 0 are marked inadmissible (kept, not promoted).
std::vector<TimeConstant> estimate_time_constants(const Vec& xdot_nq,
                                                  const Vec& xddot_nq,
                                                  double velocity_floor);

struct Promotion {
  double dt = 0.0;
  IndexList promoted;  // positions into the tau vector (NQ ordering)
  bool safeguard_needed = false;
};

// dt = min admissible tau; promoted = every admissible position with
// tau <= dt*(1+rtol). safeguard_needed is set when nothing is admissible.
Promotion select_promotion(const std::vector<TimeConstant>& tau_tilde,
                           double tau_grouping_rtol);

// Solves H_qq * xdot_q = -H_q_nq * xdot_nq through the SPD-with-fallback
// path, factorizing only the |Q|x|Q| principal block.
Vec quiescent_velocity(const Mat& H_qq, const Mat& H_q_nq, const Vec& xdot_nq,
                       double regularization_seed,
                       FactorizationLedger* ledger = nullptr);

// Advances both partitions by dt times their velocities; bumps t and the
// iteration counter. Finiteness is the caller's check (non-finite => Diverged).
void apply_step(SolverState& state, double dt, const Vec& xdot_q,
                const Vec& xdot_nq, const IndexList& q_idx,
                const IndexList& nq_idx);

// Returns the quiescent indices to demote given the gradient after the step
// and its one-step linear prediction g_pred = g_old + dt * H_old * v.
// Triggers (strict inequalities):
//   |g_new[q] - g_pred[q]| > max(eta/max_iterations, dequiescence_rtol*scale)
//   |g_new[q]|            > quiescent_gradient_ratio * scale
// with scale = ||g_new||_inf.
IndexList dequiescence_check(const Vec& g_new, const Vec& g_pred,
                             const IndexList& q_idx, const OptiQConfig& config);

// The OptiQ loop: all variables start non-quiescent; each iteration promotes
// the argmin time-constant group into quiescence, slaves the quiescent
// velocities through the partial Hessian, steps by dt = min tau, then runs
// the de-quiescence check. When no time constant is admissible the iteration
// falls back to one Armijo gradient step (recorded as safeguarded).
SolverResult solve(const ObjectiveFunction& obj, const Vec& x0,
                   const OptiQConfig& config);

}  // namespace optiq
