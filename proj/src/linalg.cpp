#include "optiq/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace optiq {
namespace {

void check_indices(const IndexList& idx, int n, const char* which) {
  std::vector<bool> seen(static_cast<size_t>(n), false);
  for (int i : idx) {
    if (i < 0 || i >= n) {
      throw std::invalid_argument(std::string(which) + " index out of range");
    }
    if (seen[static_cast<size_t>(i)]) {
      throw std::invalid_argument(std::string(which) + " index duplicated");
    }
    seen[static_cast<size_t>(i)] = true;
  }
}

Mat gather(const Mat& H, const IndexList& rows, const IndexList& cols) {
  Mat out(rows.size(), cols.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < cols.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          H(rows[r], cols[c]);
    }
  }
  return out;
}

}  // namespace

void BlockView::validate() const {
  if (source == nullptr) throw std::invalid_argument("BlockView without source");
  if (source->rows() != source->cols()) {
    throw std::invalid_argument("BlockView source must be square");
  }
  const int n = static_cast<int>(source->rows());
  check_indices(row_idx, n, "row");
  check_indices(col_idx, n, "col");
}

Mat BlockView::materialize() const {
  validate();
  return gather(*source, row_idx, col_idx);
}

HessianBlocks extract_blocks(const Mat& H, const IndexList& q_idx,
                             const IndexList& nq_idx) {
  if (H.rows() != H.cols()) {
    throw std::invalid_argument("extract_blocks needs a square matrix");
  }
  const int n = static_cast<int>(H.rows());
  check_indices(q_idx, n, "q");
  check_indices(nq_idx, n, "nq");
  if (q_idx.size() + nq_idx.size() != static_cast<size_t>(n)) {
    throw std::invalid_argument("q and nq must partition the index set");
  }
  std::vector<bool> seen(static_cast<size_t>(n), false);
  for (int i : q_idx) seen[static_cast<size_t>(i)] = true;
  for (int i : nq_idx) {
    if (seen[static_cast<size_t>(i)]) {
      throw std::invalid_argument("q and nq overlap");
    }
  }
  HessianBlocks b;
  b.qq = gather(H, q_idx, q_idx);
  b.q_nq = gather(H, q_idx, nq_idx);
  b.nq_nq = gather(H, nq_idx, nq_idx);
  b.nq_q = gather(H, nq_idx, q_idx);
  return b;
}

Vec solve_spd_with_fallback(const Mat& A, const Vec& rhs, double shift_seed,
                            FactorizationLedger* ledger, SpdSolveInfo* info) {
  if (A.rows() != A.cols() || A.rows() != rhs.size()) {
    throw std::invalid_argument("solve_spd_with_fallback dimension mismatch");
  }
  if (shift_seed <= 0.0) {
    throw std::invalid_argument("shift_seed must be positive");
  }
  const int n = static_cast<int>(A.rows());
  if (ledger != nullptr) ledger->sizes.push_back(n);
  if (info != nullptr) {
    info->size = n;
    info->shift_used = 0.0;
    info->used_lu_fallback = false;
  }
  if (n == 0) return Vec(0);

  Eigen::LLT<Mat> llt(A);
  if (llt.info() == Eigen::Success) {
    Vec x = llt.solve(rhs);
    if (x.allFinite()) return x;
  }

  double shift = shift_seed * std::max(1.0, A.diagonal().cwiseAbs().maxCoeff());
  for (int attempt = 0; attempt <= 40; ++attempt) {
    Mat shifted = A;
    shifted.diagonal().array() += shift;
    Eigen::LLT<Mat> retry(shifted);
    if (retry.info() == Eigen::Success) {
      Vec x = retry.solve(rhs);
      if (x.allFinite()) {
        if (info != nullptr) info->shift_used = shift;
        return x;
      }
    }
    shift *= 2.0;
  }

  Eigen::FullPivLU<Mat> lu(A);
  if (lu.isInvertible()) {
    Vec x = lu.solve(rhs);
    if (x.allFinite()) {
      if (info != nullptr) info->used_lu_fallback = true;
      return x;
    }
  }
  throw NumericalFailure("matrix singular beyond all fallbacks");
}

EigenEstimate max_eigenvalue(const Mat& H, double tol, int max_iter) {
  if (H.rows() != H.cols()) {
    throw std::invalid_argument("max_eigenvalue needs a square matrix");
  }
  const int n = static_cast<int>(H.rows());
  EigenEstimate est;
  if (n == 0) return est;
  if (n == 1) {
    est.value = H(0, 0);
    est.converged = true;
    return est;
  }

  // Shift by the Gershgorin lower bound so the target eigenvalue of the
  // shifted matrix is the one largest in magnitude.
  double lower = H(0, 0);
  for (int i = 0; i < n; ++i) {
    double radius = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) radius += std::abs(H(i, j));
    }
    lower = std::min(lower, H(i, i) - radius);
  }
  const double shift = lower;
  Mat S = H;
  S.diagonal().array() -= shift;  // PSD, largest eigenvalue dominant

  if (S.cwiseAbs().maxCoeff() == 0.0) {
    // H was a multiple of the identity.
    est.value = shift;
    est.converged = true;
    return est;
  }

  auto iterate = [&](Vec v) -> EigenEstimate {
    EigenEstimate out;
    v /= v.norm();
    double rayleigh = v.dot(S * v);
    for (int k = 1; k <= max_iter; ++k) {
      Vec w = S * v;
      const double wn = w.norm();
      if (wn == 0.0) {
        // Start vector sits in the null space of S; let the caller probe
        // another start.
        out.value = rayleigh + shift;
        out.iterations = k;
        return out;
      }
      v = w / wn;
      const double next = v.dot(S * v);
      const bool settled =
          std::abs(next - rayleigh) < tol * (1.0 + std::abs(next));
      rayleigh = next;
      if (settled) {
        out.value = rayleigh + shift;
        out.converged = true;
        out.iterations = k;
        return out;
      }
    }
    out.value = rayleigh + shift;
    out.converged = false;
    out.iterations = max_iter;
    return out;
  };

  // Two deterministic starts guard against the all-ones vector lying in (or
  // orthogonal to) the dominant eigenspace; keep the better estimate.
  EigenEstimate a = iterate(Vec::Ones(n));
  EigenEstimate b = iterate(Vec::Unit(n, 0));
  EigenEstimate best;
  if (a.converged == b.converged) {
    best = (b.value > a.value) ? b : a;
  } else {
    best = a.converged ? a : b;
    const EigenEstimate& other = a.converged ? b : a;
    if (other.value > best.value + tol * (1.0 + std::abs(best.value))) {
      best = other;  // an unconverged but clearly larger estimate wins
    }
  }
  best.iterations = a.iterations + b.iterations;
  return best;
}

}  // namespace optiq
