#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>

#include "helpers.hpp"
#include "optiq/linalg.hpp"
#include "optiq/types.hpp"

using namespace optiq;
using testutil::random_spd;
using testutil::random_vec;

namespace {

Mat worked_hessian() {
  Mat H(2, 2);
  H << 101.0, -100.0, -100.0, 100.0;
  return H;
}

}  // namespace

TEST_CASE("extract_blocks splits a matrix by index sets") {
  Mat H(3, 3);
  H << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  IndexList q = {1};
  IndexList nq = {0, 2};
  auto blocks = extract_blocks(H, q, nq);

  const Mat& qq = blocks.qq;
  REQUIRE(qq.rows() == 1);
  CHECK(qq(0, 0) == 5.0);

  const Mat& q_nq = blocks.q_nq;
  REQUIRE(q_nq.rows() == 1);
  REQUIRE(q_nq.cols() == 2);
  CHECK(q_nq(0, 0) == 4.0);
  CHECK(q_nq(0, 1) == 6.0);

  const Mat& nq_q = blocks.nq_q;
  CHECK(nq_q(0, 0) == 2.0);
  CHECK(nq_q(1, 0) == 8.0);

  const Mat& nq_nq = blocks.nq_nq;
  CHECK(nq_nq(0, 0) == 1.0);
  CHECK(nq_nq(0, 1) == 3.0);
  CHECK(nq_nq(1, 0) == 7.0);
  CHECK(nq_nq(1, 1) == 9.0);
}

TEST_CASE("extract_blocks round trips a random matrix") {
  std::mt19937 rng(5);
  const int n = 7;
  Mat H(n, n);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H(i, j) = gauss(rng);
  IndexList q = {2, 5, 6};
  IndexList nq = {0, 1, 3, 4};
  auto blocks = extract_blocks(H, q, nq);

  Mat rebuilt(n, n);
  const Mat& qq = blocks.qq;
  const Mat& q_nq = blocks.q_nq;
  const Mat& nq_q = blocks.nq_q;
  const Mat& nq_nq = blocks.nq_nq;
  for (size_t a = 0; a < q.size(); ++a) {
    for (size_t b = 0; b < q.size(); ++b) rebuilt(q[a], q[b]) = qq(a, b);
    for (size_t b = 0; b < nq.size(); ++b) rebuilt(q[a], nq[b]) = q_nq(a, b);
  }
  for (size_t a = 0; a < nq.size(); ++a) {
    for (size_t b = 0; b < q.size(); ++b) rebuilt(nq[a], q[b]) = nq_q(a, b);
    for (size_t b = 0; b < nq.size(); ++b) rebuilt(nq[a], nq[b]) = nq_nq(a, b);
  }
  CHECK((rebuilt - H).norm() == 0.0);
}

TEST_CASE("block view validates and materializes a submatrix") {
  Mat H(3, 3);
  H << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  BlockView view{&H, {0, 2}, {1}};
  view.validate();
  Mat sub = view.materialize();
  REQUIRE(sub.rows() == 2);
  REQUIRE(sub.cols() == 1);
  CHECK(sub(0, 0) == 2.0);
  CHECK(sub(1, 0) == 8.0);

  BlockView out_of_range{&H, {0, 3}, {1}};
  CHECK_THROWS_AS(out_of_range.validate(), std::invalid_argument);
  BlockView duplicated{&H, {0, 0}, {1}};
  CHECK_THROWS_AS(duplicated.validate(), std::invalid_argument);
}

TEST_CASE("extract_blocks rejects malformed partitions") {
  Mat H = Mat::Identity(3, 3);
  CHECK_THROWS_AS(extract_blocks(H, {0, 1}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(extract_blocks(H, {0}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(extract_blocks(H, {0, 3}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(extract_blocks(H, {-1, 0}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(extract_blocks(H, {0, 0}, {1, 2}), std::invalid_argument);
}

TEST_CASE("spd solve handles identity and a hand checked 2x2") {
  Vec rhs(2);
  rhs << 3.0, -1.0;
  Vec x = solve_spd_with_fallback(Mat::Identity(2, 2), rhs, 1e-10);
  CHECK((x - rhs).norm() == 0.0);

  Mat A(2, 2);
  A << 4.0, 2.0, 2.0, 3.0;
  Vec b(2);
  b << 2.0, 3.0;
  // Solution of [4 2; 2 3] x = [2; 3] is exactly (0, 1).
  Vec y = solve_spd_with_fallback(A, b, 1e-10);
  CHECK(y[0] == doctest::Approx(0.0));
  CHECK(y[1] == doctest::Approx(1.0));
}

TEST_CASE("spd solve on an empty system returns an empty vector") {
  Mat A(0, 0);
  Vec b(0);
  FactorizationLedger ledger;
  Vec x = solve_spd_with_fallback(A, b, 1e-10, &ledger);
  CHECK(x.size() == 0);
  REQUIRE(ledger.sizes.size() == 1);
  CHECK(ledger.sizes[0] == 0);
}

TEST_CASE("spd solve regularizes a singular matrix by shifting") {
  Mat A = Mat::Zero(2, 2);
  Vec b(2);
  b << 1.0, 2.0;
  SpdSolveInfo info;
  Vec x = solve_spd_with_fallback(A, b, 1e-10, nullptr, &info);
  CHECK(info.shift_used > 0.0);
  CHECK_FALSE(info.used_lu_fallback);
  CHECK(x.allFinite());
  // The zero matrix plus shift*I inverts to x = b / shift.
  CHECK(x[0] * info.shift_used == doctest::Approx(1.0));
  CHECK(x[1] * info.shift_used == doctest::Approx(2.0));
}

TEST_CASE("spd solve falls back to full pivot lu for strong indefiniteness") {
  // Shifts start at 1e-10 * max|diag| scale and double at most 40 times, so
  // they cannot rescue an off-diagonal dominated sign-indefinite matrix.
  Mat A(2, 2);
  A << 0.0, 1e6, 1e6, 0.0;
  Vec b(2);
  b << 1e6, 2e6;
  SpdSolveInfo info;
  Vec x = solve_spd_with_fallback(A, b, 1e-10, nullptr, &info);
  CHECK(info.used_lu_fallback);
  CHECK(x[0] == doctest::Approx(2.0));
  CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("spd solve residuals stay small on random spd systems") {
  std::mt19937 rng(42);
  FactorizationLedger ledger;
  for (int k = 0; k < 50; ++k) {
    const int n = 1 + static_cast<int>(rng() % 10);
    Mat A = random_spd(rng, n, 0.5, 200.0);
    Vec b = random_vec(rng, n, -5.0, 5.0);
    Vec x = solve_spd_with_fallback(A, b, 1e-10, &ledger);
    CHECK((A * x - b).norm() <= 1e-8 * (1.0 + b.norm()));
  }
  REQUIRE(ledger.sizes.size() == 50);
  for (int s : ledger.sizes) CHECK(s >= 1);
}

TEST_CASE("factorization ledger records every call in order") {
  FactorizationLedger ledger;
  Vec b1(1), b3(3);
  b1 << 1.0;
  b3 << 1.0, 2.0, 3.0;
  solve_spd_with_fallback(Mat::Identity(1, 1), b1, 1e-10, &ledger);
  solve_spd_with_fallback(Mat::Identity(3, 3), b3, 1e-10, &ledger);
  solve_spd_with_fallback(Mat::Identity(1, 1), b1, 1e-10, &ledger);
  REQUIRE(ledger.sizes.size() == 3);
  CHECK(ledger.sizes[0] == 1);
  CHECK(ledger.sizes[1] == 3);
  CHECK(ledger.sizes[2] == 1);
}

TEST_CASE("max eigenvalue on a diagonal matrix") {
  Vec d(3);
  d << 1.0, 2.0, 3.0;
  auto est = max_eigenvalue(Mat(d.asDiagonal()));
  CHECK(est.converged);
  CHECK(est.value == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("max eigenvalue of the worked example hessian") {
  // Eigenvalues of [101 -100; -100 100] are (201 +- sqrt(40001)) / 2.
  const double expected = (201.0 + std::sqrt(40001.0)) / 2.0;
  auto est = max_eigenvalue(worked_hessian());
  CHECK(est.converged);
  CHECK(est.value == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("max eigenvalue of the identity is one") {
  auto est = max_eigenvalue(Mat::Identity(4, 4));
  CHECK(est.converged);
  CHECK(est.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("max eigenvalue of a negative definite matrix is negative") {
  Vec d(3);
  d << -3.0, -2.0, -1.0;
  auto est = max_eigenvalue(Mat(d.asDiagonal()));
  CHECK(est.converged);
  CHECK(est.value == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("max eigenvalue survives an eigenvector orthogonal to the start") {
  // For [0 -1; -1 0] the all-ones start is orthogonal to the dominant
  // eigenvector (1, -1); the second deterministic start covers it.
  Mat A(2, 2);
  A << 0.0, -1.0, -1.0, 0.0;
  auto est = max_eigenvalue(A);
  CHECK(est.converged);
  CHECK(est.value == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("max eigenvalue agrees with a dense eigensolver on random matrices") {
  std::mt19937 rng(314);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < 25; ++k) {
    const int n = 2 + static_cast<int>(rng() % 63);
    Mat M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = gauss(rng);
    Mat A = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(A);
    const double expected = es.eigenvalues().maxCoeff();
    auto est = max_eigenvalue(A);
    CHECK(est.converged);
    CHECK(std::abs(est.value - expected) <= 1e-6 * (1.0 + std::abs(expected)));
  }
}
