#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace optiq {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IndexList = std::vector<int>;

enum class SolverStatus {
  Converged,
  MaxIterations,
  Diverged,
  NumericalFailure,
};

const char* to_string(SolverStatus status);

// Thrown by numerical kernels when every fallback is exhausted (e.g. a
// quiescent block that stays singular after regularization). Solvers catch
// it and report SolverStatus::NumericalFailure.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

struct TraceRecord {
  int iteration = 0;
  double t = 0.0;
  double dt = 0.0;
  double f_value = 0.0;
  double grad_norm = 0.0;
  int quiescent_count = 0;
  int promoted_count = 0;
  int demoted_count = 0;
  bool safeguarded = false;
  // 0.5*||xdot_nq||^2 at the start of the iteration, before the step.
  double lyapunov = 0.0;
};

struct SolverResult {
  SolverStatus status = SolverStatus::NumericalFailure;
  Vec x_final;
  double f_final = 0.0;
  // Plain (unsquared) gradient norm. Convergence tests compare the squared
  // norm against eta, so status == Converged implies grad_norm_final^2 <= eta.
  double grad_norm_final = 0.0;
  int iterations = 0;
  double t_final = 0.0;
  double wall_time = 0.0;
  std::vector<TraceRecord> trace;
  // Sizes of every matrix factorized during the run, in order.
  std::vector<int> factored_block_sizes;
};

struct SolverState {
  Vec x;
  double t = 0.0;
  IndexList quiescent;  // ordered; complement of the non-quiescent set
  int iteration = 0;
};

// Complement of q in {0..n-1}, ascending.
IndexList complement(const IndexList& q, int n);

}  // namespace optiq
