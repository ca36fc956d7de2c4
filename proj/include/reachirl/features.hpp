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

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "reachirl/arm.hpp"
#include "reachirl/csv.hpp"
#include "reachirl/error.hpp"

namespace reachirl {

inline constexpr int kNumFeatures = 7;

inline const std::array<const char*, kNumFeatures>& feature_names() {
  static const std::array<const char*, kNumFeatures> names = {
      "phi1_cartesian_velocity", "phi2_energy",         "phi3_geodesic",
      "phi4_joint_acceleration", "phi5_torque_change",  "phi6_joint_velocity",
      "phi7_joint_torque"};
  return names;
}

/// Header shared by every per-window matrix CSV (features, weights, contributions).
inline std::string window_matrix_header() {
  std::string h = "window";
  for (const char* n : feature_names()) h += std::string(",") + n;
  return h;
}

/// Uniformly sampled trajectory: states x_0..x_T and controls u_0..u_{T-1}.
struct Trajectory {
  double dt = 0.01;
  std::vector<State> states;
  std::vector<Control> controls;

  int horizon() const { return static_cast<int>(controls.size()); }
  double duration() const { return dt * horizon(); }

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
      throw Error(ErrorKind::kInvalidArgument, "trajectory dt must be > 0");
    }
    if (states.size() != controls.size() + 1) {
      throw Error(ErrorKind::kLengthMismatch, "trajectory needs |states| = |controls| + 1");
    }
    for (const auto& s : states) {
      if (!s.q.allFinite() || !s.v.allFinite()) {
        throw Error(ErrorKind::kNumericalFailure, "non-finite trajectory state");
      }
    }
    for (const auto& u : controls) {
      if (!u.tau.allFinite()) throw Error(ErrorKind::kNumericalFailure, "non-finite control");
    }
  }

  bool operator==(const Trajectory&) const = default;
};

/// Partition of control indices 0..T-1 into consecutive windows.
/// boundaries has n_windows + 1 entries; window s covers [boundaries[s], boundaries[s+1]).
struct WindowPlan {
  int n_windows = 1;
  int n_samples = 1;
  std::vector<int> boundaries;

  int horizon() const { return boundaries.empty() ? 0 : boundaries.back(); }

  int window_of(int t) const {
    int s = n_samples > 0 ? t / n_samples : 0;
    return s < n_windows ? s : n_windows - 1;
  }
};

/// N_w windows of N_s = floor(T/N_w) samples; the remainder goes to the last window.
inline WindowPlan make_window_plan(int horizon, int n_windows) {
  if (horizon < 1 || n_windows < 1 || n_windows > horizon) {
    throw Error(ErrorKind::kInvalidArgument,
                "window plan needs 1 <= n_windows <= horizon (got " + std::to_string(n_windows) +
                    " windows for horizon " + std::to_string(horizon) + ")");
  }
  WindowPlan plan;
  plan.n_windows = n_windows;
  plan.n_samples = horizon / n_windows;
  plan.boundaries.resize(n_windows + 1);
  for (int s = 0; s < n_windows; ++s) plan.boundaries[s] = s * plan.n_samples;
  plan.boundaries[n_windows] = horizon;
  return plan;
}

/// Default segmentation of a demonstration of length T_d: N_w = floor(T_d / 2).
inline WindowPlan make_window_plan(int horizon) {
  if (horizon < 2) {
    throw Error(ErrorKind::kTooShort, "window planning needs T_d >= 2, got " + std::to_string(horizon));
  }
  return make_window_plan(horizon, horizon / 2);
}

enum class EnergyForm {
  kScalarPower,    // |v^T tau|
  kPerJointPower,  // sum_j |v_j tau_j|
};

struct FeatureOptions {
  EnergyForm energy = EnergyForm::kScalarPower;
  // When > 0, |s| is replaced by sqrt(s^2 + eps^2) - eps (solver use only).
  double energy_smoothing = 0.0;
};

namespace features {

template <class S>
S smooth_abs(const S& s, double eps) {
  using std::abs;
  using std::sqrt;
  if (eps > 0.0) return sqrt(s * s + eps * eps) - eps;
  return abs(s);
}

/// Instantaneous integrands of the seven features at (x, u) with torque rate
/// (u_next - u) / dt.
template <class S>
std::array<S, kNumFeatures> rates(const ArmModel& m, const std::array<S, 4>& x,
                                  const arm::Vec2<S>& u, const arm::Vec2<S>& u_next, double dt,
                                  const FeatureOptions& opts = {}) {
  const S &q1 = x[0], &q2 = x[1], &v1 = x[2], &v2 = x[3];
  const arm::Mat2<S> J = arm::wrist_jacobian(m, q1, q2);
  const S V1 = J.a11 * v1 + J.a12 * v2;
  const S V2 = J.a21 * v1 + J.a22 * v2;
  const arm::Mat2<S> M = arm::inertia(m, q2);
  const arm::Vec2<S> a = arm::accel(m, q1, q2, v1, v2, u[0], u[1]);
  const S d1 = (u_next[0] - u[0]) / dt;
  const S d2 = (u_next[1] - u[1]) / dt;

  S energy;
  if (opts.energy == EnergyForm::kScalarPower) {
    energy = smooth_abs(v1 * u[0] + v2 * u[1], opts.energy_smoothing);
  } else {
    energy = smooth_abs(v1 * u[0], opts.energy_smoothing) +
             smooth_abs(v2 * u[1], opts.energy_smoothing);
  }
  return {V1 * V1 + V2 * V2,
          energy,
          v1 * (M.a11 * v1 + M.a12 * v2) + v2 * (M.a21 * v1 + M.a22 * v2),
          a[0] * a[0] + a[1] * a[1],
          d1 * d1 + d2 * d2,
          v1 * v1 + v2 * v2,
          u[0] * u[0] + u[1] * u[1]};
}

}  // namespace features

using FeatureVector = Eigen::Matrix<double, kNumFeatures, 1>;

inline FeatureVector feature_rates(const ArmModel& model, const State& x, const Control& u,
                                   const Control& u_next, double dt,
                                   const FeatureOptions& opts = {}) {
  if (!(dt > 0.0)) throw Error(ErrorKind::kInvalidArgument, "dt must be > 0");
  const auto r = features::rates<double>(model, {x.q[0], x.q[1], x.v[0], x.v[1]},
                                         {u.tau[0], u.tau[1]}, {u_next.tau[0], u_next.tau[1]}, dt,
                                         opts);
  FeatureVector out;
  for (int k = 0; k < kNumFeatures; ++k) out[k] = r[k];
  return out;
}

/// Per-window integrated feature costs, one row per window.
struct WindowedFeatures {
  Eigen::MatrixXd phi;  // n_windows x 7

  int n_windows() const { return static_cast<int>(phi.rows()); }
};

inline WindowedFeatures windowed_features(const ArmModel& model, const Trajectory& traj,
                                          const WindowPlan& plan, const FeatureOptions& opts = {}) {
  const int T = traj.horizon();
  if (T != plan.horizon() || static_cast<int>(plan.boundaries.size()) != plan.n_windows + 1) {
    throw Error(ErrorKind::kPlanMismatch, "trajectory horizon " + std::to_string(T) +
                                              " does not match window plan horizon " +
                                              std::to_string(plan.horizon()));
  }
  if (traj.states.size() != traj.controls.size() + 1) {
    throw Error(ErrorKind::kLengthMismatch, "trajectory needs |states| = |controls| + 1");
  }
  WindowedFeatures out{Eigen::MatrixXd::Zero(plan.n_windows, kNumFeatures)};
  for (int s = 0; s < plan.n_windows; ++s) {
    for (int t = plan.boundaries[s]; t < plan.boundaries[s + 1]; ++t) {
      // The torque rate after the final control is zero.
      const Control& next = t + 1 < T ? traj.controls[t + 1] : traj.controls[t];
      out.phi.row(s) +=
          feature_rates(model, traj.states[t], traj.controls[t], next, traj.dt, opts).transpose() *
          traj.dt;
    }
  }
  return out;
}

inline std::string window_matrix_csv(const Eigen::MatrixXd& m) {
  std::string out = window_matrix_header() + "\n";
  for (int s = 0; s < m.rows(); ++s) {
    out += std::to_string(s);
    for (int k = 0; k < m.cols(); ++k) out += "," + csv::format(m(s, k));
    out += "\n";
  }
  return out;
}

inline void write_window_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kInvalidArgument, "cannot write " + path);
  out << window_matrix_csv(m);
}

inline Eigen::MatrixXd read_window_matrix_csv(const std::string& path) {
  const auto table = csv::read_numeric(path, {window_matrix_header()});
  Eigen::MatrixXd m(static_cast<int>(table.rows.size()), kNumFeatures);
  for (std::size_t s = 0; s < table.rows.size(); ++s) {
    for (int k = 0; k < kNumFeatures; ++k) m(static_cast<int>(s), k) = table.rows[s][k + 1];
  }
  return m;
}

}  // namespace reachirl
