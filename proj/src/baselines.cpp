#include "optiq/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "optiq/linalg.hpp"

namespace optiq {
namespace {

constexpr double kDivergenceLimit = 1e12;

struct Stopwatch {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

void validate_start(const ObjectiveFunction& obj, const Vec& x0, double eta,
                    int max_iterations) {
  if (x0.size() != obj.dimension) {
    throw std::invalid_argument("x0 dimension mismatch");
  }
  if (!x0.allFinite()) throw std::invalid_argument("x0 must be finite");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
  if (max_iterations <= 0) {
    throw std::invalid_argument("max_iterations must be > 0");
  }
}

void validate_ls(const LineSearchConfig& ls) {
  if (!(ls.c1 > 0.0 && ls.c1 < 1.0)) {
    throw std::invalid_argument("c1 must be in (0,1)");
  }
  if (!(ls.shrink > 0.0 && ls.shrink < 1.0)) {
    throw std::invalid_argument("shrink must be in (0,1)");
  }
  if (!(ls.alpha0 > 0.0)) throw std::invalid_argument("alpha0 must be > 0");
  if (ls.max_backtracks <= 0) {
    throw std::invalid_argument("max_backtracks must be > 0");
  }
}

struct LineStepOutcome {
  bool ok = false;
  bool numerical_failure = false;
  double alpha = 0.0;
  Vec direction;
};

// Armijo on the given direction; on failure retries once along -g.
LineStepOutcome line_step(const ObjectiveFunction& obj, const Vec& x, double fx,
                          const Vec& gx, Vec direction,
                          const LineSearchConfig& ls) {
  LineStepOutcome out;
  ArmijoResult ar = armijo_backtrack(obj, x, fx, gx, direction, ls);
  if (!ar.success) {
    direction = -gx;
    ar = armijo_backtrack(obj, x, fx, gx, direction, ls);
    if (!ar.success) {
      out.numerical_failure = true;
      return out;
    }
  }
  out.ok = true;
  out.alpha = ar.alpha;
  out.direction = std::move(direction);
  return out;
}

using DirectionFn = std::function<Vec(const Vec& x, const Vec& g, const Vec& s,
                                      const Vec& y, bool have_prev)>;

// Shared Armijo-descent loop: direction_fn proposes a step direction given
// the current gradient and the previous (s, y) displacement pair.
SolverResult descent_loop(const ObjectiveFunction& obj, const Vec& x0,
                          double eta, int max_iterations,
                          const LineSearchConfig& ls,
                          const DirectionFn& direction_fn) {
  validate_start(obj, x0, eta, max_iterations);
  validate_ls(ls);
  Stopwatch watch;
  SolverResult result;
  Vec x = x0;

  auto finish = [&](SolverStatus status, const Vec& g) {
    result.status = status;
    result.x_final = x;
    result.f_final = obj.value(x);
    result.grad_norm_final =
        g.allFinite() ? g.norm() : std::numeric_limits<double>::quiet_NaN();
    result.iterations = static_cast<int>(result.trace.size());
    result.wall_time = watch.seconds();
    return result;
  };

  Vec g = obj.gradient(x);
  if (!g.allFinite()) return finish(SolverStatus::NumericalFailure, g);
  Vec s_prev, y_prev;
  bool have_prev = false;

  while (true) {
    if (g.squaredNorm() <= eta) return finish(SolverStatus::Converged, g);
    if (static_cast<int>(result.trace.size()) >= max_iterations) {
      return finish(SolverStatus::MaxIterations, g);
    }
    const double fx = obj.value(x);
    if (!std::isfinite(fx) || std::abs(fx) > kDivergenceLimit ||
        x.norm() > kDivergenceLimit) {
      return finish(SolverStatus::Diverged, g);
    }

    Vec d = direction_fn(x, g, s_prev, y_prev, have_prev);
    const LineStepOutcome step = line_step(obj, x, fx, g, std::move(d), ls);
    if (step.numerical_failure) {
      return finish(SolverStatus::NumericalFailure, g);
    }

    const Vec x_new = x + step.alpha * step.direction;
    if (!x_new.allFinite()) return finish(SolverStatus::Diverged, g);
    const Vec g_new = obj.gradient(x_new);
    if (!g_new.allFinite()) return finish(SolverStatus::NumericalFailure, g);

    s_prev = x_new - x;
    y_prev = g_new - g;
    have_prev = true;
    x = x_new;
    g = g_new;

    TraceRecord rec;
    rec.iteration = static_cast<int>(result.trace.size()) + 1;
    rec.t = 0.0;
    rec.dt = step.alpha;
    rec.f_value = obj.value(x);
    rec.grad_norm = g.norm();
    result.trace.push_back(rec);
    if (!std::isfinite(rec.f_value)) return finish(SolverStatus::Diverged, g);
  }
}

}  // namespace

ArmijoResult armijo_backtrack(const ObjectiveFunction& obj, const Vec& x,
                              double fx, const Vec& gx, const Vec& direction,
                              const LineSearchConfig& cfg) {
  validate_ls(cfg);
  ArmijoResult out;
  const double slope = gx.dot(direction);
  if (!(slope < 0.0) || !std::isfinite(slope)) return out;  // not descent
  double alpha = cfg.alpha0;
  for (int k = 0; k < cfg.max_backtracks; ++k) {
    const double trial = obj.value(x + alpha * direction);
    if (std::isfinite(trial) && trial <= fx + cfg.c1 * alpha * slope) {
      out.alpha = alpha;
      out.success = true;
      out.backtracks = k;
      return out;
    }
    alpha *= cfg.shrink;
  }
  out.backtracks = cfg.max_backtracks;
  return out;
}

SolverResult newton_damped_solve(const ObjectiveFunction& obj, const Vec& x0,
                                 double eta, int max_iterations,
                                 const LineSearchConfig& ls) {
  return descent_loop(
      obj, x0, eta, max_iterations, ls,
      [&obj](const Vec& x, const Vec& g, const Vec&, const Vec&, bool) -> Vec {
        const Mat H = obj.hessian(x);
        if (H.allFinite()) {
          try {
            Vec d = solve_spd_with_fallback(H, -g, 1e-10);
            if (d.dot(g) < 0.0) return d;
          } catch (const NumericalFailure&) {
          }
        }
        return -g;
      });
}

bool bfgs_update(Mat& B, const Vec& s, const Vec& y) {
  const double ys = y.dot(s);
  if (ys <= 1e-10 * y.norm() * s.norm()) return false;
  const double rho = 1.0 / ys;
  const Mat I = Mat::Identity(B.rows(), B.cols());
  B = (I - rho * s * y.transpose()) * B * (I - rho * y * s.transpose()) +
      rho * s * s.transpose();
  B = 0.5 * (B + B.transpose()).eval();
  return true;
}

SolverResult bfgs_solve(const ObjectiveFunction& obj, const Vec& x0, double eta,
                        int max_iterations, const LineSearchConfig& ls) {
  Mat B = Mat::Identity(obj.dimension, obj.dimension);
  return descent_loop(
      obj, x0, eta, max_iterations, ls,
      [&B](const Vec&, const Vec& g, const Vec& s, const Vec& y,
           bool have_prev) -> Vec {
        if (have_prev) bfgs_update(B, s, y);
        Vec d = -(B * g);
        if (!(d.dot(g) < 0.0)) {
          B = Mat::Identity(B.rows(), B.cols());
          d = -g;
        }
        return d;
      });
}

bool sr1_update(Mat& H, const Vec& s, const Vec& y) {
  const Vec v = y - H * s;
  const double vs = v.dot(s);
  if (std::abs(vs) <= 1e-8 * s.norm() * v.norm()) return false;
  H += (v * v.transpose()) / vs;
  H = 0.5 * (H + H.transpose()).eval();
  return true;
}

SolverResult sr1_solve(const ObjectiveFunction& obj, const Vec& x0, double eta,
                       int max_iterations, const LineSearchConfig& ls) {
  Mat H = Mat::Identity(obj.dimension, obj.dimension);
  return descent_loop(
      obj, x0, eta, max_iterations, ls,
      [&H](const Vec&, const Vec& g, const Vec& s, const Vec& y,
           bool have_prev) -> Vec {
        if (have_prev) sr1_update(H, s, y);
        try {
          Vec d = solve_spd_with_fallback(H, -g, 1e-10);
          if (d.dot(g) < 0.0) return d;
        } catch (const NumericalFailure&) {
        }
        return -g;
      });
}

SolverResult forward_euler_solve(const ObjectiveFunction& obj, const Vec& x0,
                                 StepPolicy policy, double dt_or_safety,
                                 double eta, int max_iterations) {
  validate_start(obj, x0, eta, max_iterations);
  if (!(dt_or_safety > 0.0)) {
    throw std::invalid_argument("step parameter must be > 0");
  }
  Stopwatch watch;
  SolverResult result;
  Vec x = x0;

  auto finish = [&](SolverStatus status, const Vec& g) {
    result.status = status;
    result.x_final = x;
    result.f_final = obj.value(x);
    result.grad_norm_final =
        g.allFinite() ? g.norm() : std::numeric_limits<double>::quiet_NaN();
    result.iterations = static_cast<int>(result.trace.size());
    result.t_final = result.trace.empty() ? 0.0 : result.trace.back().t;
    result.wall_time = watch.seconds();
    return result;
  };

  Vec g = obj.gradient(x);
  if (!g.allFinite()) return finish(SolverStatus::NumericalFailure, g);
  double t = 0.0;

  while (true) {
    if (g.squaredNorm() <= eta) return finish(SolverStatus::Converged, g);
    if (static_cast<int>(result.trace.size()) >= max_iterations) {
      return finish(SolverStatus::MaxIterations, g);
    }
    const double fx = obj.value(x);
    if (!std::isfinite(fx) || std::abs(fx) > kDivergenceLimit ||
        x.norm() > kDivergenceLimit) {
      return finish(SolverStatus::Diverged, g);
    }

    double dt = dt_or_safety;
    if (policy == StepPolicy::BoundBased) {
      const Mat H = obj.hessian(x);
      if (!H.allFinite()) return finish(SolverStatus::NumericalFailure, g);
      const EigenEstimate lam = max_eigenvalue(H);
      if (!(lam.value > 0.0)) {
        // No stability bound at this point; take a conservative unit step
        // scaled by the safety factor.
        dt = dt_or_safety;
      } else {
        dt = dt_or_safety * 2.0 / lam.value;
      }
    }

    x -= dt * g;
    t += dt;
    if (!x.allFinite()) return finish(SolverStatus::Diverged, g);
    g = obj.gradient(x);
    if (!g.allFinite()) return finish(SolverStatus::NumericalFailure, g);

    TraceRecord rec;
    rec.iteration = static_cast<int>(result.trace.size()) + 1;
    rec.t = t;
    rec.dt = dt;
    rec.f_value = obj.value(x);
    rec.grad_norm = g.norm();
    result.trace.push_back(rec);
    if (!std::isfinite(rec.f_value)) return finish(SolverStatus::Diverged, g);
  }
}

IntegrationResult reference_integrate(const ObjectiveFunction& obj,
                                      const Vec& x0, double t_end,
                                      double rel_tol, double abs_tol) {
  if (x0.size() != obj.dimension) {
    throw std::invalid_argument("x0 dimension mismatch");
  }
  if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be >= 0");
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw std::invalid_argument("tolerances must be > 0");
  }

  IntegrationResult out;
  Vec x = x0;
  double t = 0.0;
  out.samples.push_back({t, x});
  if (t_end == 0.0) {
    out.status = SolverStatus::Converged;
    return out;
  }

  auto rhs = [&obj](const Vec& p) { return Vec(-obj.gradient(p)); };

  // Bogacki-Shampine 3(2): third-order solution with an embedded
  // second-order error estimate; first-same-as-last.
  Vec k1 = rhs(x);
  if (!k1.allFinite()) {
    out.status = SolverStatus::NumericalFailure;
    return out;
  }

  const double order_exp = 1.0 / 3.0;
  double dt = std::min(t_end, 1e-2);
  double err_prev = 1.0;
  const int max_steps = 1000000;

  for (int step = 0; step < max_steps && t < t_end; ++step) {
    dt = std::min(dt, t_end - t);
    if (dt < 1e-14) {
      out.status = SolverStatus::NumericalFailure;
      return out;
    }

    const Vec k2 = rhs(x + 0.5 * dt * k1);
    const Vec k3 = rhs(x + 0.75 * dt * k2);
    const Vec x3 = x + dt * (2.0 / 9.0 * k1 + 1.0 / 3.0 * k2 + 4.0 / 9.0 * k3);
    const Vec k4 = rhs(x3);
    // Second-order embedded solution for the error estimate.
    const Vec x2 = x + dt * (7.0 / 24.0 * k1 + 0.25 * k2 + 1.0 / 3.0 * k3 +
                             0.125 * k4);
    if (!x3.allFinite() || !x2.allFinite() || !k4.allFinite()) {
      dt *= 0.5;
      out.steps_rejected += 1;
      continue;
    }

    double err = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double scale =
          abs_tol + rel_tol * std::max(std::abs(x[i]), std::abs(x3[i]));
      const double e = (x3[i] - x2[i]) / scale;
      err += e * e;
    }
    err = std::sqrt(err / static_cast<double>(x.size()));

    if (err <= 1.0) {
      t += dt;
      x = x3;
      k1 = k4;  // first-same-as-last
      out.samples.push_back({t, x});
      out.steps_accepted += 1;
      // PI controller on the accepted error history.
      const double e_now = std::max(err, 1e-10);
      double factor = 0.9 * std::pow(e_now, -0.7 * order_exp) *
                      std::pow(std::max(err_prev, 1e-10), 0.4 * order_exp);
      factor = std::clamp(factor, 0.2, 5.0);
      dt *= factor;
      err_prev = e_now;
    } else {
      out.steps_rejected += 1;
      double factor = 0.9 * std::pow(err, -order_exp);
      factor = std::clamp(factor, 0.2, 1.0);
      dt *= factor;
    }
  }

  out.status = (t >= t_end) ? SolverStatus::Converged
                            : SolverStatus::MaxIterations;
  return out;
}

}  // namespace optiq
