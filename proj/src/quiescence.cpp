#include "optiq/quiescence.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "optiq/baselines.hpp"
#include "optiq/diagnostics.hpp"

namespace optiq {

void validate(const OptiQConfig& config) {
  if (!(config.eta > 0.0)) throw std::invalid_argument("eta must be > 0");
  if (config.max_iterations <= 0) {
    throw std::invalid_argument("max_iterations must be > 0");
  }
  if (!(config.tau_grouping_rtol >= 0.0)) {
    throw std::invalid_argument("tau_grouping_rtol must be >= 0");
  }
  if (!(config.velocity_floor > 0.0)) {
    throw std::invalid_argument("velocity_floor must be > 0");
  }
  if (!(config.regularization_seed > 0.0)) {
    throw std::invalid_argument("regularization_seed must be > 0");
  }
  if (!(config.dequiescence_rtol >= 0.0)) {
    throw std::invalid_argument("dequiescence_rtol must be >= 0");
  }
  if (!(config.quiescent_gradient_ratio > 0.0)) {
    throw std::invalid_argument("quiescent_gradient_ratio must be > 0");
  }
}

Dynamics nonquiescent_dynamics(const Vec& g, const Mat& H,
                               const IndexList& q_idx, const IndexList& nq_idx,
                               const Vec& xdot_q) {
  if (!g.allFinite() || !H.allFinite()) {
    throw NumericalFailure("non-finite gradient or Hessian");
  }
  if (static_cast<size_t>(xdot_q.size()) != q_idx.size()) {
    throw std::invalid_argument("xdot_q size must match the quiescent set");
  }
  Dynamics dyn;
  const auto nn = static_cast<Eigen::Index>(nq_idx.size());
  dyn.xdot_nq.resize(nn);
  for (Eigen::Index k = 0; k < nn; ++k) {
    dyn.xdot_nq[k] = -g[nq_idx[static_cast<size_t>(k)]];
  }
  dyn.xddot_nq = Vec::Zero(nn);
  for (Eigen::Index k = 0; k < nn; ++k) {
    const int row = nq_idx[static_cast<size_t>(k)];
    double acc = 0.0;
    for (Eigen::Index j = 0; j < nn; ++j) {
      acc += H(row, nq_idx[static_cast<size_t>(j)]) * dyn.xdot_nq[j];
    }
    for (size_t j = 0; j < q_idx.size(); ++j) {
      acc += H(row, q_idx[j]) * xdot_q[static_cast<Eigen::Index>(j)];
    }
    dyn.xddot_nq[k] = -acc;
  }
  return dyn;
}

std::vector<TimeConstant> estimate_time_constants(const Vec& xdot_nq,
                                                  const Vec& xddot_nq,
                                                  double velocity_floor) {
  if (xdot_nq.size() != xddot_nq.size()) {
    throw std::invalid_argument("velocity/acceleration length mismatch");
  }
  std::vector<TimeConstant> tau(static_cast<size_t>(xdot_nq.size()));
  for (Eigen::Index i = 0; i < xdot_nq.size(); ++i) {
    TimeConstant& tc = tau[static_cast<size_t>(i)];
    if (std::abs(xdot_nq[i]) < velocity_floor || xddot_nq[i] == 0.0) {
      tc.value = 0.0;
      tc.admissible = false;
      continue;
    }
    tc.value = -xdot_nq[i] / xddot_nq[i];
    tc.admissible = tc.value > 0.0;
  }
  return tau;
}

Promotion select_promotion(const std::vector<TimeConstant>& tau_tilde,
                           double tau_grouping_rtol) {
  Promotion out;
  double dt = std::numeric_limits<double>::infinity();
  for (const TimeConstant& tc : tau_tilde) {
    if (tc.admissible && tc.value < dt) dt = tc.value;
  }
  if (!std::isfinite(dt)) {
    out.safeguard_needed = true;
    return out;
  }
  out.dt = dt;
  const double cutoff = dt * (1.0 + tau_grouping_rtol);
  for (size_t k = 0; k < tau_tilde.size(); ++k) {
    if (tau_tilde[k].admissible && tau_tilde[k].value <= cutoff) {
      out.promoted.push_back(static_cast<int>(k));
    }
  }
  return out;
}

Vec quiescent_velocity(const Mat& H_qq, const Mat& H_q_nq, const Vec& xdot_nq,
                       double regularization_seed, FactorizationLedger* ledger) {
  if (H_qq.rows() == 0) return Vec(0);
  const Vec rhs = -(H_q_nq * xdot_nq);
  return solve_spd_with_fallback(H_qq, rhs, regularization_seed, ledger);
}

void apply_step(SolverState& state, double dt, const Vec& xdot_q,
                const Vec& xdot_nq, const IndexList& q_idx,
                const IndexList& nq_idx) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  for (size_t k = 0; k < q_idx.size(); ++k) {
    state.x[q_idx[k]] += dt * xdot_q[static_cast<Eigen::Index>(k)];
  }
  for (size_t k = 0; k < nq_idx.size(); ++k) {
    state.x[nq_idx[k]] += dt * xdot_nq[static_cast<Eigen::Index>(k)];
  }
  state.t += dt;
  state.iteration += 1;
}

IndexList dequiescence_check(const Vec& g_new, const Vec& g_pred,
                             const IndexList& q_idx,
                             const OptiQConfig& config) {
  IndexList demoted;
  if (q_idx.empty()) return demoted;
  const double scale = g_new.cwiseAbs().maxCoeff();
  const double threshold =
      std::max(config.eta / config.max_iterations,
               config.dequiescence_rtol * scale);
  const double cap = config.quiescent_gradient_ratio * scale;
  for (int i : q_idx) {
    const double err = std::abs(g_new[i] - g_pred[i]);
    if (err > threshold || std::abs(g_new[i]) > cap) demoted.push_back(i);
  }
  return demoted;
}

SolverResult solve(const ObjectiveFunction& obj, const Vec& x0,
                   const OptiQConfig& config) {
  validate(config);
  if (x0.size() != obj.dimension) {
    throw std::invalid_argument("x0 dimension mismatch");
  }
  if (!x0.allFinite()) throw std::invalid_argument("x0 must be finite");

  const auto t_start = std::chrono::steady_clock::now();
  const int n = obj.dimension;
  SolverState state;
  state.x = x0;

  SolverResult result;
  FactorizationLedger ledger;
  auto finish = [&](SolverStatus status, const Vec& g) {
    result.status = status;
    result.x_final = state.x;
    result.f_final = obj.value(state.x);
    result.grad_norm_final = g.allFinite() ? g.norm()
                                           : std::numeric_limits<double>::quiet_NaN();
    result.iterations = static_cast<int>(result.trace.size());
    result.t_final = state.t;
    result.factored_block_sizes = ledger.sizes;
    result.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return result;
  };

  Vec g = obj.gradient(state.x);
  if (!g.allFinite()) return finish(SolverStatus::NumericalFailure, g);

  while (true) {
    if (g.squaredNorm() <= config.eta) {
      return finish(SolverStatus::Converged, g);
    }
    if (static_cast<int>(result.trace.size()) >= config.max_iterations) {
      return finish(SolverStatus::MaxIterations, g);
    }

    // All-quiescent with a live gradient: release the worst offender.
    if (state.quiescent.size() == static_cast<size_t>(n)) {
      int worst = 0;
      double best = -1.0;
      for (int i = 0; i < n; ++i) {
        if (std::abs(g[i]) > best) {
          best = std::abs(g[i]);
          worst = i;
        }
      }
      state.quiescent.erase(
          std::find(state.quiescent.begin(), state.quiescent.end(), worst));
    }
    const IndexList q_idx = state.quiescent;
    const IndexList nq_idx = complement(q_idx, n);

    const Mat H = obj.hessian(state.x);
    if (!H.allFinite()) return finish(SolverStatus::NumericalFailure, g);

    Vec xdot_nq(static_cast<Eigen::Index>(nq_idx.size()));
    for (size_t k = 0; k < nq_idx.size(); ++k) {
      xdot_nq[static_cast<Eigen::Index>(k)] = -g[nq_idx[k]];
    }

    Vec xdot_q(0);
    if (!q_idx.empty()) {
      const HessianBlocks blocks = extract_blocks(H, q_idx, nq_idx);
      try {
        xdot_q = quiescent_velocity(blocks.qq, blocks.q_nq, xdot_nq,
                                    config.regularization_seed, &ledger);
      } catch (const NumericalFailure&) {
        return finish(SolverStatus::NumericalFailure, g);
      }
    }

    Dynamics dyn;
    try {
      dyn = nonquiescent_dynamics(g, H, q_idx, nq_idx, xdot_q);
    } catch (const NumericalFailure&) {
      return finish(SolverStatus::NumericalFailure, g);
    }

    TraceRecord rec;
    rec.lyapunov = lyapunov_value(dyn.xdot_nq);

    const std::vector<TimeConstant> tau =
        estimate_time_constants(dyn.xdot_nq, dyn.xddot_nq,
                                config.velocity_floor);
    const Promotion promo = select_promotion(tau, config.tau_grouping_rtol);

    double dt = 0.0;
    Vec v_full = Vec::Zero(n);
    IndexList promoted_global;
    if (promo.safeguard_needed) {
      const double fx = obj.value(state.x);
      if (!std::isfinite(fx)) return finish(SolverStatus::Diverged, g);
      const ArmijoResult ls = armijo_backtrack(obj, state.x, fx, g, -g);
      if (!ls.success) return finish(SolverStatus::NumericalFailure, g);
      dt = ls.alpha;
      v_full = -g;
      rec.safeguarded = true;
    } else {
      dt = promo.dt;
      for (size_t k = 0; k < q_idx.size(); ++k) {
        v_full[q_idx[k]] = xdot_q[static_cast<Eigen::Index>(k)];
      }
      for (size_t k = 0; k < nq_idx.size(); ++k) {
        v_full[nq_idx[k]] = xdot_nq[static_cast<Eigen::Index>(k)];
      }
      promoted_global.reserve(promo.promoted.size());
      for (int pos : promo.promoted) {
        promoted_global.push_back(nq_idx[static_cast<size_t>(pos)]);
      }
    }

    const Vec g_pred = g + dt * (H * v_full);

    if (rec.safeguarded) {
      state.x += dt * v_full;
      state.t += dt;
      state.iteration += 1;
    } else {
      apply_step(state, dt, xdot_q, xdot_nq, q_idx, nq_idx);
      for (int i : promoted_global) state.quiescent.push_back(i);
    }
    if (!state.x.allFinite()) return finish(SolverStatus::Diverged, g);

    const Vec g_new = obj.gradient(state.x);
    if (!g_new.allFinite()) return finish(SolverStatus::NumericalFailure, g);
    const double f_new = obj.value(state.x);
    if (!std::isfinite(f_new)) return finish(SolverStatus::Diverged, g_new);

    const IndexList demoted =
        dequiescence_check(g_new, g_pred, state.quiescent, config);
    if (!demoted.empty()) {
      IndexList kept;
      kept.reserve(state.quiescent.size() - demoted.size());
      for (int i : state.quiescent) {
        if (std::find(demoted.begin(), demoted.end(), i) == demoted.end()) {
          kept.push_back(i);
        }
      }
      state.quiescent = std::move(kept);
    }

    rec.iteration = static_cast<int>(result.trace.size()) + 1;
    rec.t = state.t;
    rec.dt = dt;
    rec.f_value = f_new;
    rec.grad_norm = g_new.norm();
    rec.quiescent_count = static_cast<int>(state.quiescent.size());
    rec.promoted_count = static_cast<int>(promoted_global.size());
    rec.demoted_count = static_cast<int>(demoted.size());
    result.trace.push_back(rec);

    g = g_new;
  }
}

}  // namespace optiq
