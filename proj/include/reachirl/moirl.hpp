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
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "reachirl/demonstration.hpp"
#include "reachirl/doc_solver.hpp"
#include "reachirl/error.hpp"
#include "reachirl/features.hpp"
#include "reachirl/weights.hpp"

namespace reachirl {

/// How input demonstrations enter the learner.
enum class DemoRole {
  kOptimalSet,       // demonstrations are the optimal set only
  kSeedObservedSet,  // additionally seed the observed trajectory set
};

struct IrlConfig {
  double beta = 1e-9;
  double alpha0 = 1.0;
  double alpha_factor = 0.25;
  int max_alpha_trials = 10;
  int max_iterations = 50;
  double subproblem_tol = 1e-8;
  double subproblem_step_tol = 1e-10;
  int subproblem_max_iterations = 500;
  double bound_epsilon = 1e-12;  // relative margin on dw >= -w
  double convergence_tol = 1e-10;
  int convergence_patience = 3;
  std::uint64_t seed = 0;
  int n_windows = 0;  // 0: min over demos of floor(T_d / 2)
  bool pair_within_group = true;
  DemoRole demo_role = DemoRole::kOptimalSet;
  SolverOptions solver;

  void validate() const {
    if (!(beta >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "beta must be >= 0");
    if (!(alpha_factor > 0.0 && alpha_factor < 1.0)) {
      throw Error(ErrorKind::kInvalidArgument, "alpha_factor must lie in (0, 1)");
    }
    if (max_alpha_trials < 1) throw Error(ErrorKind::kInvalidArgument, "max_alpha_trials must be >= 1");
    if (max_iterations < 0) throw Error(ErrorKind::kInvalidArgument, "max_iterations must be >= 0");
    if (!(alpha0 > 0.0)) throw Error(ErrorKind::kInvalidArgument, "alpha0 must be > 0");
  }
};

/// One observed (generated) trajectory with its cached window features.
struct ObservedTrajectory {
  Trajectory traj;
  WindowedFeatures features;
  int group = 0;
};

struct TrajectorySet {
  std::vector<ObservedTrajectory> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

/// Demonstration features paired with the task group they belong to.
struct DemoFeatures {
  WindowedFeatures features;
  int group = 0;
};

namespace detail {

inline double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
  Eigen::VectorXd v(m.size());
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) v[r * m.cols() + c] = m(r, c);
  }
  return v;
}

inline Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = v[r * cols + c];
  }
  return m;
}

}  // namespace detail

/// Likelihood of the demonstration against itself plus the observed set,
/// exp(-w.Phi*) / sum_i exp(-w.Phi_i), evaluated in the log domain.
inline double demo_probability(const WeightSchedule& w, const WindowedFeatures& demo,
                               const TrajectorySet& set) {
  const double own = -total_cost(demo, w);
  std::vector<double> terms{own};
  for (const auto& e : set.entries) terms.push_back(-total_cost(e.features, w));
  return std::exp(own - detail::log_sum_exp(terms));
}

/// Objective of the weight-update subproblem for fixed weights w_n:
///   sum_d log(1 + sum_i gamma_i exp(-dw.(Phi_i - Phi*_d))) + beta/2 |dw|^2,
///   gamma_i = exp(-w_n.(Phi_i - Phi*_d)).
/// Vectors are the row-major flattening of N_w x 7 matrices.
class WeightUpdateObjective {
 public:
  WeightUpdateObjective(const WeightSchedule& w_n, const std::vector<DemoFeatures>& demos,
                        const TrajectorySet& set, double beta, bool pair_within_group)
      : beta_(beta), rows_(w_n.n_windows()) {
    const Eigen::VectorXd wn = detail::flatten(w_n.w);
    for (const auto& d : demos) {
      if (d.features.phi.rows() != w_n.w.rows() || d.features.phi.cols() != kNumFeatures) {
        throw Error(ErrorKind::kShapeMismatch, "demo features do not match the weight schedule");
      }
      Block b;
      const Eigen::VectorXd star = detail::flatten(d.features.phi);
      for (const auto& e : set.entries) {
        if (pair_within_group && e.group != d.group) continue;
        if (e.features.phi.rows() != w_n.w.rows()) {
          throw Error(ErrorKind::kShapeMismatch, "observed features do not match the weight schedule");
        }
        const Eigen::VectorXd gap = detail::flatten(e.features.phi) - star;
        b.gaps.push_back(gap);
        b.log_gamma.push_back(-wn.dot(gap));
      }
      if (!b.gaps.empty()) blocks_.push_back(std::move(b));
    }
  }

  int size() const { return rows_ * kNumFeatures; }
  bool has_terms() const { return !blocks_.empty(); }

  bool degenerate() const {
    for (const auto& b : blocks_) {
      for (const auto& g : b.gaps) {
        if (g.cwiseAbs().maxCoeff() > 0.0) return false;
      }
    }
    return true;
  }

  double value(const Eigen::VectorXd& dw) const {
    double f = 0.5 * beta_ * dw.squaredNorm();
    std::vector<double> e;
    for (const auto& b : blocks_) {
      exponents(b, dw, e);
      f += detail::log_sum_exp(e);
    }
    return f;
  }

  double evaluate(const Eigen::VectorXd& dw, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) const {
    const int n = size();
    double f = 0.5 * beta_ * dw.squaredNorm();
    if (grad) *grad = beta_ * dw;
    if (hess) *hess = beta_ * Eigen::MatrixXd::Identity(dw.size(), dw.size());
    std::vector<double> e;
    Eigen::VectorXd mean(n);
    for (const auto& b : blocks_) {
      exponents(b, dw, e);
      const double lse = detail::log_sum_exp(e);
      f += lse;
      if (!grad && !hess) continue;
      mean.setZero();
      // e[0] is the "1" term with zero gap.
      for (std::size_t i = 0; i < b.gaps.size(); ++i) {
        const double p = std::exp(e[i + 1] - lse);
        if (p == 0.0) continue;
        mean += p * b.gaps[i];
        if (hess) hess->selfadjointView<Eigen::Lower>().rankUpdate(b.gaps[i], p);
      }
      if (grad) *grad -= mean;
      if (hess) hess->selfadjointView<Eigen::Lower>().rankUpdate(mean, -1.0);
    }
    if (hess) *hess = hess->selfadjointView<Eigen::Lower>();
    return f;
  }

 private:
  struct Block {
    std::vector<Eigen::VectorXd> gaps;
    std::vector<double> log_gamma;
  };

  static void exponents(const Block& b, const Eigen::VectorXd& dw, std::vector<double>& e) {
    e.assign(1, 0.0);
    for (std::size_t i = 0; i < b.gaps.size(); ++i) e.push_back(b.log_gamma[i] - dw.dot(b.gaps[i]));
  }

  double beta_;
  int rows_;
  std::vector<Block> blocks_;
};

struct WeightUpdate {
  Eigen::MatrixXd dw;
  double objective = 0.0;
  double projected_gradient_norm = 0.0;
  int iterations = 0;
  bool degenerate = false;
};

/// Projected-gradient residual for the lower-bounded problem.
inline double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                      const Eigen::VectorXd& lb) {
  return (x - (x - g).cwiseMax(lb)).lpNorm<Eigen::Infinity>();
}

/// Minimizes the weight-update objective subject to dw >= -w_n (1 - eps) with a
/// projected Newton method (free variables take Newton steps, variables held
/// at the bound take scaled gradient steps).
inline WeightUpdate delta_w_subproblem(const WeightSchedule& w_n,
                                       const std::vector<DemoFeatures>& demos,
                                       const TrajectorySet& set, const IrlConfig& cfg) {
  if (demos.empty() || set.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "subproblem needs at least one demo and one set entry");
  }
  WeightUpdateObjective obj(w_n, demos, set, cfg.beta, cfg.pair_within_group);
  const int n = obj.size();
  WeightUpdate out;
  out.dw = Eigen::MatrixXd::Zero(w_n.n_windows(), kNumFeatures);
  if (!obj.has_terms() || obj.degenerate()) {
    out.degenerate = true;
    out.objective = obj.value(Eigen::VectorXd::Zero(n));
    return out;
  }

  const Eigen::VectorXd lb = -detail::flatten(w_n.w) * (1.0 - cfg.bound_epsilon);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n), g, trial, gt;
  Eigen::MatrixXd H;
  double f = obj.evaluate(x, &g, &H);
  for (; out.iterations < cfg.subproblem_max_iterations; ++out.iterations) {
    const double pg = projected_gradient_norm(x, g, lb);
    if (pg == 0.0) break;

    // Bertsekas' epsilon-active set.
    const double eps_active = std::min(1e-6, pg);
    std::vector<int> free_idx, active_idx;
    for (int j = 0; j < n; ++j) {
      if (x[j] <= lb[j] + eps_active && g[j] > 0.0) {
        active_idx.push_back(j);
      } else {
        free_idx.push_back(j);
      }
    }
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    if (!free_idx.empty()) {
      const int nf = static_cast<int>(free_idx.size());
      Eigen::MatrixXd Hf(nf, nf);
      Eigen::VectorXd gf(nf);
      for (int a = 0; a < nf; ++a) {
        gf[a] = g[free_idx[a]];
        for (int b = 0; b < nf; ++b) Hf(a, b) = H(free_idx[a], free_idx[b]);
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(Hf);
      Eigen::VectorXd pf = ldlt.solve(-gf);
      if (ldlt.info() != Eigen::Success || !pf.allFinite() || pf.dot(gf) >= 0.0) {
        const double shift = 1e-12 * std::max(1.0, Hf.diagonal().maxCoeff());
        Hf.diagonal().array() += shift;
        pf = Hf.llt().solve(-gf);
        if (!pf.allFinite() || pf.dot(gf) >= 0.0) pf = -gf;
      }
      for (int a = 0; a < nf; ++a) p[free_idx[a]] = pf[a];
    }
    for (int j : active_idx) p[j] = -g[j] / std::max(H(j, j), 1e-12);
    // With a tiny regularizer the objective is flat, so a small gradient alone
    // does not pin down the minimizer; the projected Newton step must vanish too.
    const double step_size = ((x + p).cwiseMax(lb) - x).lpNorm<Eigen::Infinity>();
    if (pg <= cfg.subproblem_tol && step_size <= cfg.subproblem_step_tol * (1.0 + x.lpNorm<Eigen::Infinity>())) {
      break;
    }

    bool accepted = false;
    double step = 1.0;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      trial = (x + step * p).cwiseMax(lb);
      const double ft = obj.evaluate(trial, &gt, nullptr);
      if (!std::isfinite(ft)) continue;
      const double decrease = g.dot(trial - x);
      if (ft <= f + 1e-4 * decrease ||
          (ft <= f && projected_gradient_norm(trial, gt, lb) < pg)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    x = trial;
    f = obj.evaluate(x, &g, &H);
  }
  out.dw = detail::unflatten(x, w_n.n_windows(), kNumFeatures);
  out.objective = f;
  out.projected_gradient_norm = projected_gradient_norm(x, g, lb);
  return out;
}

/// Mean over demonstrations of the per-sample squared full-state gap
/// |x*_t - x_t|^2, x = (q1, q2, v1, v2).
inline double merit(const std::vector<Trajectory>& predicted, const std::vector<Trajectory>& demos) {
  if (predicted.size() != demos.size() || demos.empty()) {
    throw Error(ErrorKind::kLengthMismatch, "merit needs one prediction per demonstration");
  }
  double total = 0.0;
  for (std::size_t d = 0; d < demos.size(); ++d) {
    const auto& a = predicted[d].states;
    const auto& b = demos[d].states;
    if (a.size() != b.size() || std::abs(predicted[d].dt - demos[d].dt) > 1e-12) {
      throw Error(ErrorKind::kLengthMismatch, "prediction " + std::to_string(d) +
                                                  " is not time-aligned with its demonstration");
    }
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) s += (a[t].stacked() - b[t].stacked()).squaredNorm();
    total += s / static_cast<double>(a.size());
  }
  return total / static_cast<double>(demos.size());
}

inline double merit(const std::vector<Trajectory>& predicted, const std::vector<Demonstration>& demos) {
  std::vector<Trajectory> refs;
  refs.reserve(demos.size());
  for (const auto& d : demos) refs.push_back(d.traj);
  return merit(predicted, refs);
}

enum class TerminationReason { kConverged, kNoImprovingAlpha, kMaxIterations };

inline const char* to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::kConverged: return "converged";
    case TerminationReason::kNoImprovingAlpha: return "no_improving_alpha";
    case TerminationReason::kMaxIterations: return "max_iterations";
  }
  return "unknown";
}

/// Setup shared by all demonstrations of one task group: one DOC solve per
/// group and line-search trial.
struct TaskGroup {
  std::string subject_id;
  Posture posture = Posture::P1;
  ArmModel arm;
  Eigen::Vector2d q0 = Eigen::Vector2d::Zero();
  double target_x = 0.0;
  int horizon = 0;
  double dt = 0.0;
  WindowPlan plan;
  std::vector<int> demos;  // indices into the input list
};

struct LineSearchTrial {
  double alpha = 0.0;
  double merit = 0.0;
  bool solver_converged = true;
  bool accepted = false;
};

struct IrlResult {
  WeightSchedule weights;
  std::vector<double> merit_history;  // initial merit, then one per accepted step
  int accepted_steps = 0;
  std::vector<TaskGroup> groups;
  std::vector<DocSolution> final_trajectories;  // one per group
  std::vector<std::vector<LineSearchTrial>> trials;  // per outer iteration
  TerminationReason terminated_reason = TerminationReason::kMaxIterations;
  std::size_t observed_set_size = 0;
};

using DocSolverFn =
    std::function<DocSolution(const DocProblem&, const std::optional<Trajectory>& warm_start)>;

/// Window count shared by all demonstrations: min over demos of floor(T_d / 2).
inline int shared_window_count(const std::vector<Demonstration>& demos) {
  int nw = std::numeric_limits<int>::max();
  for (const auto& d : demos) nw = std::min(nw, make_window_plan(d.horizon()).n_windows);
  return nw;
}

/// Groups demonstrations by (subject, posture, horizon, dt); the group's start
/// posture and target are the means over its members.
inline std::vector<TaskGroup> make_task_groups(const std::vector<Demonstration>& demos, int n_windows) {
  std::map<std::tuple<std::string, int, int, double>, int> index;
  std::vector<TaskGroup> groups;
  for (std::size_t i = 0; i < demos.size(); ++i) {
    const auto& d = demos[i];
    const auto key = std::make_tuple(d.subject_id, static_cast<int>(d.posture), d.horizon(), d.traj.dt);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, static_cast<int>(groups.size())).first;
      TaskGroup g;
      g.subject_id = d.subject_id;
      g.posture = d.posture;
      g.arm = d.arm;
      g.horizon = d.horizon();
      g.dt = d.traj.dt;
      g.plan = make_window_plan(d.horizon(), n_windows);
      groups.push_back(std::move(g));
    }
    groups[it->second].demos.push_back(static_cast<int>(i));
  }
  for (auto& g : groups) {
    for (int i : g.demos) {
      g.q0 += demos[i].q0();
      g.target_x += demos[i].target_x;
    }
    g.q0 /= static_cast<double>(g.demos.size());
    g.target_x /= static_cast<double>(g.demos.size());
  }
  return groups;
}

inline DocProblem make_problem(const TaskGroup& g, const WeightSchedule& w) {
  DocProblem p;
  p.model = g.arm;
  p.q0 = g.q0;
  p.target_x = g.target_x;
  p.horizon = g.horizon;
  p.dt = g.dt;
  p.plan = g.plan;
  p.weights = w;
  return p;
}

inline FeatureOptions exact_feature_options(const SolverOptions& o) {
  FeatureOptions f;
  f.energy = o.energy_form;
  return f;
}

/// Demonstration features on the group's window plan; torques come from
/// inverse dynamics when the demonstration carries none.
inline WindowedFeatures demo_features(const Demonstration& d, const WindowPlan& plan,
                                      const FeatureOptions& opts) {
  if (d.traj.controls.size() + 1 == d.traj.states.size()) {
    return windowed_features(d.arm, d.traj, plan, opts);
  }
  Trajectory t = d.traj;
  t.controls = torques_from_states(d.arm, t);
  return windowed_features(d.arm, t, plan, opts);
}

/// Iterative weight learning from demonstrations: weight-update subproblem,
/// merit line search over alpha in {alpha0, alpha0 f, alpha0 f^2, ...}, and
/// growth of the observed set with every accepted step.
inline IrlResult run(const std::vector<Demonstration>& demos, const IrlConfig& cfg,
                     DocSolverFn solver = {},
                     std::optional<WeightSchedule> initial_weights = std::nullopt) {
  cfg.validate();
  if (demos.empty()) throw Error(ErrorKind::kInvalidArgument, "learning needs at least one demonstration");
  for (const auto& d : demos) d.validate();
  if (!solver) {
    const SolverOptions opts = cfg.solver;
    solver = [opts](const DocProblem& p, const std::optional<Trajectory>& warm) {
      return solve(p, warm, opts);
    };
  }
  const int nw = cfg.n_windows > 0 ? cfg.n_windows : shared_window_count(demos);
  const FeatureOptions fopts = exact_feature_options(cfg.solver);

  IrlResult result;
  result.groups = make_task_groups(demos, nw);
  const auto& groups = result.groups;

  std::vector<DemoFeatures> demo_feats(demos.size());
  std::vector<int> group_of(demos.size());
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    for (int i : groups[gi].demos) {
      group_of[i] = static_cast<int>(gi);
      demo_feats[i] = {demo_features(demos[i], groups[gi].plan, fopts), static_cast<int>(gi)};
    }
  }

  WeightSchedule w = initial_weights ? *initial_weights : WeightSchedule::uniform(nw);
  if (w.n_windows() != nw) throw Error(ErrorKind::kShapeMismatch, "initial weights have the wrong window count");

  auto solve_all = [&](const WeightSchedule& weights, const std::vector<DocSolution>* warm,
                       const std::string& context) {
    std::vector<DocSolution> out;
    out.reserve(groups.size());
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      std::optional<Trajectory> ws;
      if (warm) ws = (*warm)[gi].traj;
      try {
        out.push_back(solver(make_problem(groups[gi], weights), ws));
      } catch (const Error& e) {
        throw Error(e.kind(), context + ", group " + groups[gi].subject_id + "/" +
                                  to_string(groups[gi].posture) + ": " + e.what());
      }
    }
    return out;
  };
  auto predictions_for_demos = [&](const std::vector<DocSolution>& sols) {
    std::vector<Trajectory> p(demos.size());
    for (std::size_t i = 0; i < demos.size(); ++i) p[i] = sols[group_of[i]].traj;
    return p;
  };
  TrajectorySet set;
  auto add_to_set = [&](const std::vector<DocSolution>& sols) {
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      set.entries.push_back({sols[gi].traj,
                             windowed_features(groups[gi].arm, sols[gi].traj, groups[gi].plan, fopts),
                             static_cast<int>(gi)});
    }
  };

  std::vector<DocSolution> current = solve_all(w, nullptr, "initial solve");
  add_to_set(current);
  if (cfg.demo_role == DemoRole::kSeedObservedSet) {
    for (std::size_t i = 0; i < demos.size(); ++i) {
      set.entries.push_back({demos[i].traj, demo_feats[i].features, group_of[i]});
    }
  }
  double current_merit = merit(predictions_for_demos(current), demos);
  result.merit_history.push_back(current_merit);

  int stalled = 0;
  result.terminated_reason = TerminationReason::kMaxIterations;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    const WeightUpdate update = delta_w_subproblem(w, demo_feats, set, cfg);
    if (update.degenerate || update.dw.cwiseAbs().maxCoeff() == 0.0) {
      result.terminated_reason = TerminationReason::kConverged;
      break;
    }
    auto& trials = result.trials.emplace_back();
    bool accepted = false;
    double alpha = cfg.alpha0;
    for (int k = 0; k < cfg.max_alpha_trials; ++k, alpha *= cfg.alpha_factor) {
      Eigen::MatrixXd cand = (w.w + alpha * update.dw).cwiseMax(0.0);
      const WeightSchedule w_try(std::move(cand));
      auto sols = solve_all(w_try, &current,
                            "iteration " + std::to_string(iter) + ", trial " + std::to_string(k));
      const double m = merit(predictions_for_demos(sols), demos);
      const bool ok = std::all_of(sols.begin(), sols.end(), [](const DocSolution& s) { return s.converged; });
      // A trial only counts when every task's DOC converged.
      const bool improves = ok && m < current_merit;
      trials.push_back({alpha, m, ok, improves});
      if (improves) {
        add_to_set(sols);
        stalled = current_merit - m < cfg.convergence_tol ? stalled + 1 : 0;
        current_merit = m;
        current = std::move(sols);
        w = w_try;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      result.terminated_reason = TerminationReason::kNoImprovingAlpha;
      break;
    }
    ++result.accepted_steps;
    result.merit_history.push_back(current_merit);
    if (stalled >= cfg.convergence_patience) {
      result.terminated_reason = TerminationReason::kConverged;
      break;
    }
  }
  result.weights = w;
  result.final_trajectories = std::move(current);
  result.observed_set_size = set.size();
  return result;
}

/// Single-model convenience: every demonstration is evaluated with `model`.
inline IrlResult run(std::vector<Demonstration> demos, const ArmModel& model, const IrlConfig& cfg,
                     DocSolverFn solver = {}) {
  for (auto& d : demos) d.arm = model;
  return run(demos, cfg, std::move(solver));
}

inline void to_json(nlohmann::json& j, const IrlConfig& c) {
  j = nlohmann::json{{"beta", c.beta},
                     {"alpha0", c.alpha0},
                     {"alpha_factor", c.alpha_factor},
                     {"max_alpha_trials", c.max_alpha_trials},
                     {"max_iterations", c.max_iterations},
                     {"subproblem_tol", c.subproblem_tol},
                     {"subproblem_step_tol", c.subproblem_step_tol},
                     {"subproblem_max_iterations", c.subproblem_max_iterations},
                     {"bound_epsilon", c.bound_epsilon},
                     {"convergence_tol", c.convergence_tol},
                     {"convergence_patience", c.convergence_patience},
                     {"seed", c.seed},
                     {"n_windows", c.n_windows},
                     {"pair_within_group", c.pair_within_group},
                     {"demo_role", c.demo_role == DemoRole::kOptimalSet ? "optimal_set" : "seed_observed_set"},
                     {"solver", c.solver}};
}

inline void from_json(const nlohmann::json& j, IrlConfig& c) {
  const IrlConfig d;
  c.beta = j.value("beta", d.beta);
  c.alpha0 = j.value("alpha0", d.alpha0);
  c.alpha_factor = j.value("alpha_factor", d.alpha_factor);
  c.max_alpha_trials = j.value("max_alpha_trials", d.max_alpha_trials);
  c.max_iterations = j.value("max_iterations", d.max_iterations);
  c.subproblem_tol = j.value("subproblem_tol", d.subproblem_tol);
  c.subproblem_step_tol = j.value("subproblem_step_tol", d.subproblem_step_tol);
  c.subproblem_max_iterations = j.value("subproblem_max_iterations", d.subproblem_max_iterations);
  c.bound_epsilon = j.value("bound_epsilon", d.bound_epsilon);
  c.convergence_tol = j.value("convergence_tol", d.convergence_tol);
  c.convergence_patience = j.value("convergence_patience", d.convergence_patience);
  c.seed = j.value("seed", d.seed);
  c.n_windows = j.value("n_windows", d.n_windows);
  c.pair_within_group = j.value("pair_within_group", d.pair_within_group);
  const std::string role = j.value("demo_role", std::string("optimal_set"));
  if (role == "optimal_set") {
    c.demo_role = DemoRole::kOptimalSet;
  } else if (role == "seed_observed_set") {
    c.demo_role = DemoRole::kSeedObservedSet;
  } else {
    throw Error(ErrorKind::kInvalidArgument, "unknown demo_role '" + role + "'");
  }
  c.solver = j.contains("solver") ? j.at("solver").get<SolverOptions>() : d.solver;
  c.validate();
}

}  // namespace reachirl
