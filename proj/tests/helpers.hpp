#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "optiq/objective.hpp"

namespace testutil {

using optiq::Mat;
using optiq::ObjectiveFunction;
using optiq::Vec;

inline Vec fd_gradient(const ObjectiveFunction& obj, const Vec& x) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(x[i]));
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (obj.value(xp) - obj.value(xm)) / (2.0 * h);
  }
  return g;
}

inline Mat fd_hessian_of_gradient(const ObjectiveFunction& obj, const Vec& x) {
  const auto n = x.size();
  Mat H(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(x[j]));
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    H.col(j) = (obj.gradient(xp) - obj.gradient(xm)) / (2.0 * h);
  }
  return Mat(0.5 * (H + H.transpose()));
}

inline Vec random_vec(std::mt19937& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = dist(rng);
  return x;
}

// SPD matrix with eigenvalues drawn from [lo, hi], pairwise separated by at
// least min_gap (relative), under a random orthogonal similarity.
inline Mat random_spd(std::mt19937& rng, int n, double lo, double hi,
                      double min_gap = 1e-3) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vec lam(n);
  while (true) {
    for (int i = 0; i < n; ++i) lam[i] = dist(rng);
    std::sort(lam.data(), lam.data() + n);
    bool ok = true;
    for (int i = 0; i + 1 < n; ++i) {
      if (lam[i + 1] - lam[i] < min_gap * lam[i + 1]) ok = false;
    }
    if (ok) break;
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat M(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) M(i, j) = gauss(rng);
  }
  const Mat Q = Eigen::HouseholderQR<Mat>(M).householderQ();
  Mat A = Q * lam.asDiagonal() * Q.transpose();
  return Mat(0.5 * (A + A.transpose()));
}

// Quadratic objective f(x) = 0.5 (x-c)' A (x-c) for SPD A.
inline ObjectiveFunction quadratic_objective(const Mat& A, const Vec& c) {
  ObjectiveFunction obj;
  obj.name = "random_quadratic";
  obj.dimension = static_cast<int>(A.rows());
  obj.value = [A, c](const Vec& x) {
    const Vec d = x - c;
    return 0.5 * d.dot(A * d);
  };
  obj.gradient = [A, c](const Vec& x) { return Vec(A * (x - c)); };
  obj.hessian = [A](const Vec&) { return A; };
  return obj;
}

inline ObjectiveFunction diagonal_quadratic(const Vec& lam, const Vec& c) {
  ObjectiveFunction obj;
  obj.name = "diagonal_quadratic";
  obj.dimension = static_cast<int>(lam.size());
  obj.value = [lam, c](const Vec& x) {
    const Vec d = x - c;
    return 0.5 * d.dot(lam.cwiseProduct(d));
  };
  obj.gradient = [lam, c](const Vec& x) {
    return Vec(lam.cwiseProduct(x - c));
  };
  obj.hessian = [lam](const Vec&) { return Mat(lam.asDiagonal()); };
  return obj;
}

}  // namespace testutil
