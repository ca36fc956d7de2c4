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
#include <optional>
#include <string>

#include <Eigen/Core>

#include "reachirl/arm.hpp"
#include "reachirl/error.hpp"
#include "reachirl/features.hpp"

namespace reachirl {

enum class Posture { P1 = 1, P2, P3, P4, P5 };

inline std::string to_string(Posture p) { return "P" + std::to_string(static_cast<int>(p)); }

inline Posture parse_posture(const std::string& s) {
  if (s.size() == 2 && (s[0] == 'P' || s[0] == 'p') && s[1] >= '1' && s[1] <= '5') {
    return static_cast<Posture>(s[1] - '0');
  }
  throw Error(ErrorKind::kInvalidArgument, "posture must be one of P1..P5, got '" + s + "'");
}

inline constexpr std::array<Posture, 5> kAllPostures = {Posture::P1, Posture::P2, Posture::P3,
                                                        Posture::P4, Posture::P5};

/// Shoulder/elbow angles [rad] of the five starting postures. These are
/// representative values chosen for this library (elbow flexion decreasing
/// from P3 to P4), not measured data.
inline Eigen::Vector2d default_posture_angles(Posture p) {
  switch (p) {
    case Posture::P1: return {0.0 * kDegToRad, 75.0 * kDegToRad};
    case Posture::P2: return {20.0 * kDegToRad, 80.0 * kDegToRad};
    case Posture::P3: return {40.0 * kDegToRad, 110.0 * kDegToRad};
    case Posture::P4: return {-5.0 * kDegToRad, 60.0 * kDegToRad};
    case Posture::P5: return {60.0 * kDegToRad, 60.0 * kDegToRad};
  }
  return {0.0, 0.0};
}

/// Wrist target on the bar: 85% of the total arm length in front of the shoulder.
inline double protocol_target_x(const ArmModel& arm) { return 0.85 * arm.total_length(); }

/// A reference reaching movement with its task metadata.
struct Demonstration {
  std::string subject_id = "S01";
  Posture posture = Posture::P1;
  Trajectory traj;
  double target_x = 0.0;
  ArmModel arm;
  // Velocity at the first sample before it was forced to rest, if measured.
  Eigen::Vector2d measured_initial_velocity = Eigen::Vector2d::Zero();
  // Ground-truth weights for synthetic demonstrations.
  std::optional<Eigen::MatrixXd> w_true;

  int horizon() const { return traj.horizon(); }
  const Eigen::Vector2d& q0() const { return traj.states.front().q; }

  void validate() const {
    arm.validate();
    traj.validate();
    if (traj.horizon() < 2) throw Error(ErrorKind::kTooShort, "demonstration needs T_d >= 2");
    const auto& q = q0();
    if ((q.array() < arm.q_min.array() - 1e-9).any() || (q.array() > arm.q_max.array() + 1e-9).any()) {
      throw Error(ErrorKind::kInvalidArgument, "initial posture outside joint bounds");
    }
  }
};

/// Torques consistent with the semi-implicit integrator, a_t = (v_{t+1} - v_t) / dt.
inline std::vector<Control> torques_from_states(const ArmModel& arm, const Trajectory& traj) {
  std::vector<Control> out;
  out.reserve(traj.states.size() - 1);
  for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
    const Eigen::Vector2d a = (traj.states[t + 1].v - traj.states[t].v) / traj.dt;
    out.push_back(inverse_dynamics(arm, traj.states[t].q, traj.states[t].v, a));
  }
  return out;
}

}  // namespace reachirl
