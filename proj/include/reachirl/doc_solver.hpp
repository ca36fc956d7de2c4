// Copyright 2026 The reachirl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "reachirl/arm.hpp"
#include "reachirl/dual.hpp"
#include "reachirl/error.hpp"
#include "reachirl/features.hpp"
#include "reachirl/weights.hpp"

namespace reachirl {

struct SolverOptions {
  double tol_con = 1e-4;         // terminal/bound violation accepted as converged
  double tol_con_target = 1e-9;  // keep updating multipliers until this is met
  double tol_kkt = 1e-6;         // relative to max(1, |objective|)
  int max_outer_iterations = 500;
  int max_inner_iterations = 200;
  double penalty_init = 10.0;
  double penalty_growth = 10.0;
  double penalty_max = 1e10;
  double zero_window_effort = 1e-10;
  double energy_smoothing = 1e-4;  // W; applied inside the solver only
  EnergyForm energy_form = EnergyForm::kScalarPower;
  bool terminal_velocity_penalty = false;
  double terminal_velocity_weight = 1.0;  // relative to the largest weight
  bool record_history = false;
};

/// Reach from rest at q0 so that the wrist ends at X = target_x after `horizon` steps.
struct DocProblem {
  ArmModel model;
  Eigen::Vector2d q0 = Eigen::Vector2d::Zero();
  double target_x = 0.0;
  int horizon = 0;
  double dt = 0.01;
  WindowPlan plan;
  WeightSchedule weights;

  void validate() const {
    model.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::kInvalidArgument, "dt must be > 0");
    if (horizon < 1) throw Error(ErrorKind::kInvalidArgument, "horizon must be >= 1");
    if (plan.horizon() != horizon) {
      throw Error(ErrorKind::kPlanMismatch, "window plan does not cover the horizon");
    }
    if (weights.n_windows() != plan.n_windows) {
      throw Error(ErrorKind::kShapeMismatch, "weights rows must equal the number of windows");
    }
    weights.validate();
    if (!q0.allFinite() || (q0.array() < model.q_min.array() - 1e-12).any() ||
        (q0.array() > model.q_max.array() + 1e-12).any()) {
      throw Error(ErrorKind::kInvalidArgument, "initial posture outside joint bounds");
    }
    if (!std::isfinite(target_x) || std::abs(target_x) > model.total_length()) {
      throw Error(ErrorKind::kInfeasible, "target X beyond the arm's reach");
    }
  }
};

struct DocSolution {
  Trajectory traj;
  double objective = 0.0;
  double kkt_residual = 0.0;
  double constraint_violation = 0.0;
  int iterations = 0;  // outer (multiplier) iterations
  int inner_iterations = 0;
  bool converged = false;
  // Augmented-Lagrangian value after each accepted inner step, one list per
  // outer iteration (filled when SolverOptions::record_history is set).
  std::vector<std::vector<double>> history;
};

/// Simulates from rest at q0.
inline Trajectory rollout(const ArmModel& model, const Eigen::Vector2d& q0,
                          const std::vector<Control>& controls, double dt) {
  Trajectory traj;
  traj.dt = dt;
  traj.controls = controls;
  traj.states.reserve(controls.size() + 1);
  traj.states.push_back({q0, Eigen::Vector2d::Zero()});
  for (const auto& u : controls) {
    if (!u.tau.allFinite()) throw Error(ErrorKind::kInvalidArgument, "non-finite control");
    traj.states.push_back(step(model, traj.states.back(), u, dt));
  }
  return traj;
}

/// Range of wrist X reachable inside the joint box (sampled).
inline std::pair<double, double> reachable_x_range(const ArmModel& m, int samples = 121) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i < samples; ++i) {
    const double q1 = m.q_min[0] + (m.q_max[0] - m.q_min[0]) * i / (samples - 1);
    for (int j = 0; j < samples; ++j) {
      const double q2 = m.q_min[1] + (m.q_max[1] - m.q_min[1]) * j / (samples - 1);
      const double x = arm::wrist(m, q1, q2)[0];
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  return {lo, hi};
}

namespace detail {

// Single-shooting objective over the stacked control vector u = (u_0, ..., u_{T-1})
// with augmented-Lagrangian terms for the terminal X equality and the state bounds.
class ShootingObjective {
 public:
  static constexpr int kBounds = 8;

  ShootingObjective(const DocProblem& p, const SolverOptions& o) : p_(p), o_(o) {
    const double wmax = p.weights.w.maxCoeff();
    scale_ = wmax > 0.0 ? wmax : 1.0;
    w_ = p.weights.w / scale_;
    effort_.assign(p.plan.n_windows, 0.0);
    for (int s = 0; s < p.plan.n_windows; ++s) {
      if ((w_.row(s).array() == 0.0).all()) effort_[s] = o.zero_window_effort;
    }
    fopts_.energy = o.energy_form;
    fopts_.energy_smoothing = o.energy_smoothing;
    mu_.assign(static_cast<std::size_t>(p.horizon) * kBounds, 0.0);
    rho_ = o.penalty_init;
  }

  int size() const { return 2 * p_.horizon; }
  double weight_scale() const { return scale_; }
  double& rho() { return rho_; }

  std::vector<Control> controls(const Eigen::VectorXd& u) const {
    std::vector<Control> c(p_.horizon);
    for (int t = 0; t < p_.horizon; ++t) c[t].tau = u.segment<2>(2 * t);
    return c;
  }

  // Normalized running cost plus zero-window effort, without constraint terms.
  double cost(const Eigen::VectorXd& u) const {
    const auto x = simulate(u);
    double c = 0.0;
    for (int t = 0; t < p_.horizon; ++t) c += stage_value(t, x, u);
    return c;
  }

  double value(const Eigen::VectorXd& u) const {
    const auto x = simulate(u);
    double c = 0.0;
    for (int t = 0; t < p_.horizon; ++t) c += stage_value(t, x, u);
    for (int t = 1; t <= p_.horizon; ++t) c += bound_penalty(t, x[t], nullptr);
    c += terminal_penalty(x[p_.horizon], nullptr);
    return c;
  }

  double value_and_gradient(const Eigen::VectorXd& u, Eigen::VectorXd& grad) const {
    using D = Dual<8>;
    const int T = p_.horizon;
    const auto x = simulate(u);
    grad.setZero(size());
    double total = 0.0;
    std::array<double, 4> adj{};
    total += terminal_penalty(x[T], &adj);
    total += bound_penalty(T, x[T], &adj);
    for (int t = T - 1; t >= 0; --t) {
      const bool last = t == T - 1;
      std::array<D, 4> xd;
      for (int i = 0; i < 4; ++i) xd[i] = D::variable(x[t][i], i);
      const arm::Vec2<D> ud{D::variable(u[2 * t], 4), D::variable(u[2 * t + 1], 5)};
      const arm::Vec2<D> und =
          last ? ud : arm::Vec2<D>{D::variable(u[2 * t + 2], 6), D::variable(u[2 * t + 3], 7)};
      const D c = stage<D>(t, xd, ud, und);
      const auto next = arm::step(p_.model, xd, ud, p_.dt);
      total += c.v;
      std::array<double, 4> prev{};
      for (int i = 0; i < 4; ++i) {
        double s = c.d[i];
        for (int k = 0; k < 4; ++k) s += adj[k] * next[k].d[i];
        prev[i] = s;
      }
      for (int j = 0; j < 2; ++j) {
        double s = c.d[4 + j];
        for (int k = 0; k < 4; ++k) s += adj[k] * next[k].d[4 + j];
        grad[2 * t + j] += s;
        if (!last) grad[2 * t + 2 + j] += c.d[6 + j];
      }
      if (t >= 1) total += bound_penalty(t, x[t], &prev);
      adj = prev;
    }
    return total;
  }

  double terminal_error(const Eigen::VectorXd& u) const {
    const auto x = simulate(u);
    return arm::wrist(p_.model, x.back()[0], x.back()[1])[0] - p_.target_x;
  }

  // Feasibility violation and complementarity residual (using current multipliers).
  std::pair<double, double> violation(const Eigen::VectorXd& u) const {
    const auto x = simulate(u);
    double feas = std::abs(arm::wrist(p_.model, x.back()[0], x.back()[1])[0] - p_.target_x);
    double comp = 0.0;
    for (int t = 1; t <= p_.horizon; ++t) {
      const auto g = bound_values(x[t]);
      for (int i = 0; i < kBounds; ++i) {
        feas = std::max(feas, g[i]);
        comp = std::max(comp, std::abs(std::min(-g[i], mu_[idx(t, i)])));
      }
    }
    return {feas, comp};
  }

  void update_multipliers(const Eigen::VectorXd& u) {
    const auto x = simulate(u);
    lambda_ += rho_ * (arm::wrist(p_.model, x.back()[0], x.back()[1])[0] - p_.target_x);
    for (int t = 1; t <= p_.horizon; ++t) {
      const auto g = bound_values(x[t]);
      for (int i = 0; i < kBounds; ++i) mu_[idx(t, i)] = std::max(0.0, mu_[idx(t, i)] + rho_ * g[i]);
    }
  }

 private:
  using X = std::array<double, 4>;

  std::size_t idx(int t, int i) const { return static_cast<std::size_t>(t - 1) * kBounds + i; }

  std::vector<X> simulate(const Eigen::VectorXd& u) const {
    std::vector<X> x(p_.horizon + 1);
    x[0] = {p_.q0[0], p_.q0[1], 0.0, 0.0};
    for (int t = 0; t < p_.horizon; ++t) {
      x[t + 1] = arm::step(p_.model, x[t], arm::Vec2<double>{u[2 * t], u[2 * t + 1]}, p_.dt);
    }
    return x;
  }

  template <class S>
  S stage(int t, const std::array<S, 4>& x, const arm::Vec2<S>& u, const arm::Vec2<S>& un) const {
    const int s = p_.plan.window_of(t);
    const auto r = features::rates<S>(p_.model, x, u, un, p_.dt, fopts_);
    S c(0.0);
    for (int k = 0; k < kNumFeatures; ++k) {
      if (w_(s, k) != 0.0) c += w_(s, k) * r[k];
    }
    if (effort_[s] > 0.0) c += effort_[s] * r[6];
    return c * p_.dt;
  }

  double stage_value(int t, const std::vector<X>& x, const Eigen::VectorXd& u) const {
    const bool last = t == p_.horizon - 1;
    const arm::Vec2<double> ut{u[2 * t], u[2 * t + 1]};
    const arm::Vec2<double> un = last ? ut : arm::Vec2<double>{u[2 * t + 2], u[2 * t + 3]};
    return stage<double>(t, x[t], ut, un);
  }

  std::array<double, kBounds> bound_values(const X& x) const {
    const auto& m = p_.model;
    return {x[0] - m.q_max[0], x[1] - m.q_max[1], m.q_min[0] - x[0], m.q_min[1] - x[1],
            x[2] - m.v_max[0], x[3] - m.v_max[1], -x[2] - m.v_max[0], -x[3] - m.v_max[1]};
  }

  // (1/2rho) (max(0, mu + rho g)^2 - mu^2); accumulates d/dx into grad when given.
  double bound_penalty(int t, const X& x, std::array<double, 4>* grad) const {
    static constexpr int kState[kBounds] = {0, 1, 0, 1, 2, 3, 2, 3};
    static constexpr double kSign[kBounds] = {1, 1, -1, -1, 1, 1, -1, -1};
    const auto g = bound_values(x);
    double v = 0.0;
    for (int i = 0; i < kBounds; ++i) {
      const double mu = mu_[idx(t, i)];
      const double shifted = std::max(0.0, mu + rho_ * g[i]);
      v += (shifted * shifted - mu * mu) / (2.0 * rho_);
      if (grad && shifted > 0.0) (*grad)[kState[i]] += shifted * kSign[i];
    }
    return v;
  }

  double terminal_penalty(const X& x, std::array<double, 4>* grad) const {
    const double h = arm::wrist(p_.model, x[0], x[1])[0] - p_.target_x;
    double v = lambda_ * h + 0.5 * rho_ * h * h;
    if (grad) {
      const auto J = arm::wrist_jacobian(p_.model, x[0], x[1]);
      const double k = lambda_ + rho_ * h;
      (*grad)[0] += k * J.a11;
      (*grad)[1] += k * J.a12;
    }
    if (o_.terminal_velocity_penalty) {
      const double wv = o_.terminal_velocity_weight;
      v += wv * (x[2] * x[2] + x[3] * x[3]);
      if (grad) {
        (*grad)[2] += 2.0 * wv * x[2];
        (*grad)[3] += 2.0 * wv * x[3];
      }
    }
    return v;
  }

  const DocProblem& p_;
  const SolverOptions& o_;
  Eigen::MatrixXd w_;
  double scale_ = 1.0;
  std::vector<double> effort_;
  FeatureOptions fopts_;
  double lambda_ = 0.0;
  std::vector<double> mu_;
  double rho_ = 10.0;
};

inline bool all_finite(double v, const Eigen::VectorXd& g) { return std::isfinite(v) && g.allFinite(); }

struct InnerResult {
  double gradient_norm = 0.0;
  int iterations = 0;
};

// Levenberg-Marquardt safeguarded Newton with a forward-difference Hessian of the
// analytic gradient and Armijo backtracking.
inline InnerResult minimize_newton(const ShootingObjective& f, Eigen::VectorXd& u, double tol,
                                   int max_iter, std::vector<double>* history) {
  const int n = f.size();
  Eigen::VectorXd g(n), gp(n), trial(n), gt(n);
  double fu = f.value_and_gradient(u, g);
  if (!all_finite(fu, g)) throw Error(ErrorKind::kNumericalFailure, "non-finite objective or gradient");
  if (history) history->push_back(fu);
  Eigen::MatrixXd H(n, n);
  double damping = 0.0;
  InnerResult res;
  for (; res.iterations < max_iter; ++res.iterations) {
    const double gnorm = g.lpNorm<Eigen::Infinity>();
    if (gnorm <= tol) break;
    for (int j = 0; j < n; ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(u[j]));
      Eigen::VectorXd up = u;
      up[j] += h;
      f.value_and_gradient(up, gp);
      H.col(j) = (gp - g) / h;
    }
    H = 0.5 * (H + H.transpose()).eval();
    const double hscale = std::max(1e-12, H.diagonal().cwiseAbs().maxCoeff());

    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      Eigen::MatrixXd A = H;
      A.diagonal().array() += damping;
      Eigen::LLT<Eigen::MatrixXd> llt(A);
      Eigen::VectorXd p;
      if (llt.info() == Eigen::Success) p = llt.solve(-g);
      const double slope = p.size() ? g.dot(p) : 0.0;
      if (llt.info() != Eigen::Success || !p.allFinite() || slope >= 0.0) {
        damping = std::max(1e-10 * hscale, 10.0 * damping);
        continue;
      }
      double step = 1.0;
      for (int ls = 0; ls < 30; ++ls, step *= 0.5) {
        trial = u + step * p;
        const double ft = f.value_and_gradient(trial, gt);
        if (!all_finite(ft, gt)) continue;
        const bool armijo = ft <= fu + 1e-4 * step * slope;
        // Near the optimum the decrease falls below roundoff; accept a
        // non-increasing step that reduces the gradient.
        const bool roundoff = ft <= fu && gt.lpNorm<Eigen::Infinity>() < gnorm;
        if (armijo || roundoff) {
          u = trial;
          fu = ft;
          g = gt;
          accepted = true;
          break;
        }
      }
      if (accepted) {
        damping = step == 1.0 ? damping * 0.25 : damping;
        if (damping < 1e-12 * hscale) damping = 0.0;
      } else {
        damping = std::max(1e-10 * hscale, 10.0 * damping);
      }
    }
    if (!accepted) break;  // stalled at roundoff
    if (history) history->push_back(fu);
  }
  res.gradient_norm = g.lpNorm<Eigen::Infinity>();
  return res;
}

}  // namespace detail

namespace detail {

struct Attempt {
  Eigen::VectorXd u;
  double kkt = 0.0;
  double violation = 0.0;
  int outer = 0;
  int inner = 0;
  std::vector<std::vector<double>> history;
};

inline Attempt augmented_lagrangian(const DocProblem& problem, const SolverOptions& opts,
                                    Eigen::VectorXd u) {
  ShootingObjective f(problem, opts);
  Attempt a;
  double prev_residual = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < opts.max_outer_iterations; ++outer) {
    const double scale = std::max(1.0, std::abs(f.cost(u)));
    std::vector<double>* hist = nullptr;
    if (opts.record_history) hist = &a.history.emplace_back();
    const auto inner = minimize_newton(f, u, 0.5 * opts.tol_kkt * scale, opts.max_inner_iterations, hist);
    a.inner += inner.iterations;
    a.outer = outer + 1;
    a.kkt = inner.gradient_norm / std::max(1.0, std::abs(f.cost(u)));
    f.update_multipliers(u);
    const auto [feas, comp] = f.violation(u);
    a.violation = feas;
    const double residual = std::max(feas, comp);
    if (residual <= opts.tol_con_target && a.kkt <= opts.tol_kkt) break;
    if (residual > 0.25 * prev_residual) {
      if (f.rho() >= opts.penalty_max) break;
      f.rho() = std::min(opts.penalty_max, f.rho() * opts.penalty_growth);
    }
    prev_residual = residual;
  }
  a.u = std::move(u);
  return a;
}

}  // namespace detail

/// Solves the windowed-cost reaching problem by single shooting over the
/// controls. Terminal X and joint/velocity bounds are handled with an
/// augmented Lagrangian. Weights are normalized by their largest entry
/// internally, so solutions are invariant to positive rescaling of w.
///
/// A warm-started solve that stalls at an infeasible point is restarted from
/// the gravity-compensation guess. Unconverged results are returned with
/// converged = false.
inline DocSolution solve(const DocProblem& problem, const std::optional<Trajectory>& warm_start,
                         const SolverOptions& opts = {}) {
  problem.validate();
  const auto [xlo, xhi] = reachable_x_range(problem.model);
  if (problem.target_x < xlo - 1e-9 || problem.target_x > xhi + 1e-9) {
    throw Error(ErrorKind::kInfeasible, "target X outside the reachable range of the joint box");
  }

  const int n = 2 * problem.horizon;
  Eigen::VectorXd cold(n);
  const Eigen::Vector2d g0 = gravity_torque(problem.model, problem.q0);
  for (int t = 0; t < problem.horizon; ++t) cold.segment<2>(2 * t) = g0;

  detail::Attempt best;
  if (warm_start) {
    if (warm_start->horizon() != problem.horizon || std::abs(warm_start->dt - problem.dt) > 1e-15) {
      throw Error(ErrorKind::kInvalidArgument, "warm start horizon/dt do not match the problem");
    }
    Eigen::VectorXd u(n);
    for (int t = 0; t < problem.horizon; ++t) u.segment<2>(2 * t) = warm_start->controls[t].tau;
    if (!u.allFinite()) throw Error(ErrorKind::kInvalidArgument, "non-finite warm start");
    best = detail::augmented_lagrangian(problem, opts, std::move(u));
    if (best.violation > opts.tol_con) {
      auto retry = detail::augmented_lagrangian(problem, opts, cold);
      retry.outer += best.outer;
      retry.inner += best.inner;
      if (retry.violation < best.violation) best = std::move(retry);
    }
  } else {
    best = detail::augmented_lagrangian(problem, opts, cold);
  }

  DocSolution sol;
  std::vector<Control> controls(problem.horizon);
  for (int t = 0; t < problem.horizon; ++t) controls[t].tau = best.u.segment<2>(2 * t);
  sol.traj = rollout(problem.model, problem.q0, controls, problem.dt);
  FeatureOptions exact;
  exact.energy = opts.energy_form;
  sol.objective = total_cost(windowed_features(problem.model, sol.traj, problem.plan, exact), problem.weights);
  sol.kkt_residual = best.kkt;
  sol.constraint_violation = best.violation;
  sol.iterations = best.outer;
  sol.inner_iterations = best.inner;
  sol.history = std::move(best.history);
  sol.converged = best.violation <= opts.tol_con && best.kkt <= opts.tol_kkt;
  if (!std::isfinite(sol.objective)) throw Error(ErrorKind::kNumericalFailure, "non-finite objective");
  return sol;
}

inline DocSolution solve(const DocProblem& problem, const SolverOptions& opts = {}) {
  return solve(problem, std::nullopt, opts);
}

inline void to_json(nlohmann::json& j, const SolverOptions& o) {
  j = nlohmann::json{{"tol_con", o.tol_con},
                     {"tol_con_target", o.tol_con_target},
                     {"tol_kkt", o.tol_kkt},
                     {"max_outer_iterations", o.max_outer_iterations},
                     {"max_inner_iterations", o.max_inner_iterations},
                     {"penalty_init", o.penalty_init},
                     {"penalty_growth", o.penalty_growth},
                     {"penalty_max", o.penalty_max},
                     {"zero_window_effort", o.zero_window_effort},
                     {"energy_smoothing", o.energy_smoothing},
                     {"energy_per_joint", o.energy_form == EnergyForm::kPerJointPower},
                     {"terminal_velocity_penalty", o.terminal_velocity_penalty},
                     {"terminal_velocity_weight", o.terminal_velocity_weight}};
}

inline void from_json(const nlohmann::json& j, SolverOptions& o) {
  const SolverOptions d;
  o.tol_con = j.value("tol_con", d.tol_con);
  o.tol_con_target = j.value("tol_con_target", d.tol_con_target);
  o.tol_kkt = j.value("tol_kkt", d.tol_kkt);
  o.max_outer_iterations = j.value("max_outer_iterations", d.max_outer_iterations);
  o.max_inner_iterations = j.value("max_inner_iterations", d.max_inner_iterations);
  o.penalty_init = j.value("penalty_init", d.penalty_init);
  o.penalty_growth = j.value("penalty_growth", d.penalty_growth);
  o.penalty_max = j.value("penalty_max", d.penalty_max);
  o.zero_window_effort = j.value("zero_window_effort", d.zero_window_effort);
  o.energy_smoothing = j.value("energy_smoothing", d.energy_smoothing);
  o.energy_form = j.value("energy_per_joint", false) ? EnergyForm::kPerJointPower
                                                      : EnergyForm::kScalarPower;
  o.terminal_velocity_penalty = j.value("terminal_velocity_penalty", d.terminal_velocity_penalty);
  o.terminal_velocity_weight = j.value("terminal_velocity_weight", d.terminal_velocity_weight);
  o.record_history = false;
}

}  // namespace reachirl
