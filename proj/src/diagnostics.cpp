#include "optiq/diagnostics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

#include "optiq/linalg.hpp"

namespace optiq {

double lyapunov_value(const Vec& xdot) { return 0.5 * xdot.squaredNorm(); }

FeBound fe_stability_bound(const ObjectiveFunction& obj, const Vec& x) {
  FeBound out;
  const Mat H = obj.hessian(x);
  if (!H.allFinite()) return out;
  const EigenEstimate lam = max_eigenvalue(H);
  if (lam.value > 0.0) {
    out.value = 2.0 / lam.value;
    out.applicable = true;
  }
  return out;
}

Vec gradient_flow_oracle_quadratic(const Mat& Q, const Vec& b, const Vec& x0,
                                   double t) {
  if (Q.rows() != Q.cols() || Q.rows() != b.size() || b.size() != x0.size()) {
    throw std::invalid_argument("oracle dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(Q);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("eigendecomposition failed");
  }
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("oracle requires a positive definite matrix");
  }
  // x* solves Qx = -b; modal coefficients come from projecting x0 - x*.
  const Vec xstar = es.eigenvectors() *
                    (es.eigenvectors().transpose() * (-b)).cwiseQuotient(
                        es.eigenvalues());
  const Vec c = es.eigenvectors().transpose() * (x0 - xstar);
  Vec x = xstar;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    x += c[i] * std::exp(-es.eigenvalues()[i] * t) * es.eigenvectors().col(i);
  }
  return x;
}

std::vector<BoundFlag> step_bound_report(const std::vector<TraceRecord>& trace,
                                         double lambda_min, double lambda_max,
                                         double rtol) {
  if (!(lambda_min > 0.0) || lambda_max < lambda_min) {
    throw std::invalid_argument("need 0 < lambda_min <= lambda_max");
  }
  const double lower = 1.0 / lambda_max;
  const double upper = (1.0 / lambda_min) * (1.0 + rtol);
  const bool single_cluster =
      (lambda_max - lambda_min) <= rtol * lambda_max;
  std::vector<BoundFlag> flags;
  flags.reserve(trace.size());
  for (const TraceRecord& rec : trace) {
    if (rec.safeguarded || !(rec.dt > 0.0)) {
      flags.push_back(BoundFlag::NotChecked);
      continue;
    }
    // Allow one part in 1e12 below the lower bound: the bound is exact in
    // real arithmetic and the dt computation rounds independently of it.
    if (rec.dt >= lower * (1.0 - 1e-12) && rec.dt <= upper) {
      if (single_cluster &&
          std::abs(rec.dt - 1.0 / lambda_max) <= rtol / lambda_max) {
        flags.push_back(BoundFlag::PassEquality);
      } else {
        flags.push_back(BoundFlag::Pass);
      }
    } else {
      flags.push_back(BoundFlag::Fail);
    }
  }
  return flags;
}

}  // namespace optiq
