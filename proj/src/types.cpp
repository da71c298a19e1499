#include "optiq/types.hpp"

#include <algorithm>

namespace optiq {

const char* to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::Converged:
      return "Converged";
    case SolverStatus::MaxIterations:
      return "MaxIterations";
    case SolverStatus::Diverged:
      return "Diverged";
    case SolverStatus::NumericalFailure:
      return "NumericalFailure";
  }
  return "Unknown";
}

IndexList complement(const IndexList& q, int n) {
  std::vector<bool> in_q(static_cast<size_t>(n), false);
  for (int i : q) {
    if (i >= 0 && i < n) in_q[static_cast<size_t>(i)] = true;
  }
  IndexList out;
  out.reserve(static_cast<size_t>(n) - q.size());
  for (int i = 0; i < n; ++i) {
    if (!in_q[static_cast<size_t>(i)]) out.push_back(i);
  }
  return out;
}

}  // namespace optiq
