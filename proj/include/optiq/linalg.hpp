#pragma once

#include "optiq/types.hpp"

namespace optiq {

// Validated view into a symmetric matrix: row/col index lists must be
// in range and duplicate-free.
struct BlockView {
  const Mat* source = nullptr;
  IndexList row_idx;
  IndexList col_idx;

  void validate() const;  // throws std::invalid_argument on violations
  Mat materialize() const;
};

struct HessianBlocks {
  Mat qq;
  Mat q_nq;
  Mat nq_nq;
  Mat nq_q;
};

// Dense copies of the four principal/cross blocks of H under the (q, nq)
// partition. q and nq must partition {0..n-1}.
HessianBlocks extract_blocks(const Mat& H, const IndexList& q_idx,
                             const IndexList& nq_idx);

// Per-run instrumentation: size of every factorized matrix, in order.
struct FactorizationLedger {
  std::vector<int> sizes;
};

struct SpdSolveInfo {
  double shift_used = 0.0;
  int size = 0;
  bool used_lu_fallback = false;
};

// Solves A x = rhs for symmetric A. Tries an SPD (Cholesky) factorization
// first; on failure retries with a diagonal shift mu = shift_seed *
// max(1, max|A_ii|), doubling mu up to 40 times; finally falls back to a
// full-pivot LU. Records A's size into the ledger (once per call).
// Throws NumericalFailure if the matrix is singular beyond all fallbacks.
Vec solve_spd_with_fallback(const Mat& A, const Vec& rhs, double shift_seed,
                            FactorizationLedger* ledger = nullptr,
                            SpdSolveInfo* info = nullptr);

struct EigenEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Largest eigenvalue of a symmetric matrix by power iteration on a
// Gershgorin-shifted copy (shift makes the target eigenvalue dominant in
// magnitude). Deterministic start: normalized all-ones, falling back to e1
// when all-ones has no component along the dominant eigenvector.
// The iteration cap is sized for loose shifts: convergence degrades as the
// shift magnitude grows relative to the spectral gap.
EigenEstimate max_eigenvalue(const Mat& H, double tol = 1e-10,
                             int max_iter = 20000);

}  // namespace optiq
