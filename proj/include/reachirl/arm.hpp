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
#include <numbers>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "reachirl/error.hpp"

namespace reachirl {

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/// Planar two-segment arm (upper arm, forearm) hinged at the shoulder.
///
/// Angles: q1 is measured from the horizontal +X axis (pointing toward the
/// target), q2 is the relative elbow angle. Gravity acts along -Z.
struct ArmModel {
  double l1 = 0.30;   // upper arm length [m]
  double l2 = 0.33;   // forearm length to the wrist [m]
  double m1 = 1.96;   // [kg]
  double m2 = 1.54;   // [kg]
  double c1 = 0.131;  // COM distance from shoulder [m]
  double c2 = 0.200;  // COM distance from elbow [m]
  double I1 = 0.0183; // about the segment COM [kg m^2]
  double I2 = 0.0367;
  double g = 9.81;
  Eigen::Vector2d q_min{-10.0 * kDegToRad, -10.0 * kDegToRad};
  Eigen::Vector2d q_max{170.0 * kDegToRad, 170.0 * kDegToRad};
  Eigen::Vector2d v_max{20.0, 20.0};

  double total_length() const { return l1 + l2; }

  void validate() const {
    auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
    if (!positive(l1) || !positive(l2) || !positive(m1) || !positive(m2) || !positive(I1) ||
        !positive(I2)) {
      throw Error(ErrorKind::kInvalidArgument, "arm lengths, masses and inertias must be > 0");
    }
    if (!positive(c1) || !positive(c2) || c1 > l1 || c2 > l2) {
      throw Error(ErrorKind::kInvalidArgument, "COM offsets must satisfy 0 < c_i <= l_i");
    }
    if (!std::isfinite(g) || g < 0.0) {
      throw Error(ErrorKind::kInvalidArgument, "gravity must be finite and >= 0");
    }
    for (int j = 0; j < 2; ++j) {
      if (!(q_min[j] < q_max[j])) {
        throw Error(ErrorKind::kInvalidArgument, "q_min must be < q_max");
      }
      if (!positive(v_max[j])) {
        throw Error(ErrorKind::kInvalidArgument, "v_max must be > 0");
      }
    }
  }
};

struct State {
  Eigen::Vector2d q = Eigen::Vector2d::Zero();
  Eigen::Vector2d v = Eigen::Vector2d::Zero();

  Eigen::Vector4d stacked() const { return {q[0], q[1], v[0], v[1]}; }
  bool operator==(const State&) const = default;
};

struct Control {
  Eigen::Vector2d tau = Eigen::Vector2d::Zero();
  bool operator==(const Control&) const = default;
};

// Scalar-generic closed forms. S is double or a Dual<N>.
namespace arm {

template <class S>
using Vec2 = std::array<S, 2>;

template <class S>
struct Mat2 {
  S a11, a12, a21, a22;
};

template <class S>
Vec2<S> wrist(const ArmModel& m, const S& q1, const S& q2) {
  using std::cos;
  using std::sin;
  const S q12 = q1 + q2;
  return {m.l1 * cos(q1) + m.l2 * cos(q12), m.l1 * sin(q1) + m.l2 * sin(q12)};
}

template <class S>
Mat2<S> wrist_jacobian(const ArmModel& m, const S& q1, const S& q2) {
  using std::cos;
  using std::sin;
  const S q12 = q1 + q2;
  const S s1 = sin(q1), c1 = cos(q1), s12 = sin(q12), c12 = cos(q12);
  return {-m.l1 * s1 - m.l2 * s12, -m.l2 * s12, m.l1 * c1 + m.l2 * c12, m.l2 * c12};
}

template <class S>
Mat2<S> inertia(const ArmModel& m, const S& q2) {
  using std::cos;
  const S k = m.m2 * m.l1 * m.c2 * cos(q2);
  const double m22 = m.I2 + m.m2 * m.c2 * m.c2;
  const S m12 = m22 + k;
  const S m11 = m.I1 + m.m1 * m.c1 * m.c1 + m.I2 + m.m2 * (m.l1 * m.l1 + m.c2 * m.c2) + 2.0 * k;
  return {m11, m12, m12, S(m22)};
}

// Coriolis matrix with Mdot - 2C skew-symmetric.
template <class S>
Mat2<S> coriolis(const ArmModel& m, const S& q2, const S& v1, const S& v2) {
  using std::sin;
  const S h = m.m2 * m.l1 * m.c2 * sin(q2);
  return {-h * v2, -h * (v1 + v2), h * v1, S(0.0)};
}

template <class S>
Vec2<S> gravity(const ArmModel& m, const S& q1, const S& q2) {
  using std::cos;
  const S t2 = m.m2 * m.c2 * m.g * cos(q1 + q2);
  return {(m.m1 * m.c1 + m.m2 * m.l1) * m.g * cos(q1) + t2, t2};
}

// C(q,v) v + g(q)
template <class S>
Vec2<S> bias(const ArmModel& m, const S& q1, const S& q2, const S& v1, const S& v2) {
  using std::sin;
  const S h = m.m2 * m.l1 * m.c2 * sin(q2);
  const Vec2<S> gq = gravity(m, q1, q2);
  return {-h * v2 * (2.0 * v1 + v2) + gq[0], h * v1 * v1 + gq[1]};
}

template <class S>
Vec2<S> accel(const ArmModel& m, const S& q1, const S& q2, const S& v1, const S& v2, const S& t1,
              const S& t2) {
  const Mat2<S> M = inertia(m, q2);
  const Vec2<S> b = bias(m, q1, q2, v1, v2);
  const S r1 = t1 - b[0];
  const S r2 = t2 - b[1];
  const S det = M.a11 * M.a22 - M.a12 * M.a21;
  return {(M.a22 * r1 - M.a12 * r2) / det, (M.a11 * r2 - M.a21 * r1) / det};
}

// Semi-implicit Euler: v' = v + a dt, q' = q + v' dt.
template <class S>
std::array<S, 4> step(const ArmModel& m, const std::array<S, 4>& x, const Vec2<S>& u, double dt) {
  const Vec2<S> a = accel(m, x[0], x[1], x[2], x[3], u[0], u[1]);
  const S v1 = x[2] + a[0] * dt;
  const S v2 = x[3] + a[1] * dt;
  return {x[0] + v1 * dt, x[1] + v2 * dt, v1, v2};
}

}  // namespace arm

inline Eigen::Matrix2d to_eigen(const arm::Mat2<double>& m) {
  Eigen::Matrix2d r;
  r << m.a11, m.a12, m.a21, m.a22;
  return r;
}

/// Wrist position (X, Z) in the shoulder frame.
inline Eigen::Vector2d forward_kinematics(const ArmModel& model, const Eigen::Vector2d& q) {
  const auto p = arm::wrist(model, q[0], q[1]);
  return {p[0], p[1]};
}

inline Eigen::Matrix2d jacobian(const ArmModel& model, const Eigen::Vector2d& q) {
  return to_eigen(arm::wrist_jacobian(model, q[0], q[1]));
}

inline Eigen::Matrix2d mass_matrix(const ArmModel& model, const Eigen::Vector2d& q) {
  return to_eigen(arm::inertia(model, q[1]));
}

inline Eigen::Matrix2d coriolis_matrix(const ArmModel& model, const Eigen::Vector2d& q,
                                       const Eigen::Vector2d& v) {
  return to_eigen(arm::coriolis(model, q[1], v[0], v[1]));
}

inline Eigen::Vector2d gravity_torque(const ArmModel& model, const Eigen::Vector2d& q) {
  const auto g = arm::gravity(model, q[0], q[1]);
  return {g[0], g[1]};
}

inline Control inverse_dynamics(const ArmModel& model, const Eigen::Vector2d& q,
                                const Eigen::Vector2d& v, const Eigen::Vector2d& a) {
  const auto b = arm::bias(model, q[0], q[1], v[0], v[1]);
  return {mass_matrix(model, q) * a + Eigen::Vector2d(b[0], b[1])};
}

inline Eigen::Vector2d forward_dynamics(const ArmModel& model, const Eigen::Vector2d& q,
                                        const Eigen::Vector2d& v, const Eigen::Vector2d& tau) {
  const auto a = arm::accel(model, q[0], q[1], v[0], v[1], tau[0], tau[1]);
  return {a[0], a[1]};
}

inline State step(const ArmModel& model, const State& x, const Control& u, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::kInvalidArgument, "dt must be > 0");
  const auto n = arm::step(model, std::array<double, 4>{x.q[0], x.q[1], x.v[0], x.v[1]},
                           arm::Vec2<double>{u.tau[0], u.tau[1]}, dt);
  return {{n[0], n[1]}, {n[2], n[3]}};
}

inline double kinetic_energy(const ArmModel& model, const State& x) {
  return 0.5 * x.v.dot(mass_matrix(model, x.q) * x.v);
}

// JSON: SI units, angles in radians.
inline void to_json(nlohmann::json& j, const ArmModel& m) {
  j = nlohmann::json{{"l1", m.l1},
                     {"l2", m.l2},
                     {"m1", m.m1},
                     {"m2", m.m2},
                     {"c1", m.c1},
                     {"c2", m.c2},
                     {"I1", m.I1},
                     {"I2", m.I2},
                     {"g", m.g},
                     {"q_min", {m.q_min[0], m.q_min[1]}},
                     {"q_max", {m.q_max[0], m.q_max[1]}},
                     {"v_max", {m.v_max[0], m.v_max[1]}}};
}

inline void from_json(const nlohmann::json& j, ArmModel& m) {
  ArmModel d;
  m.l1 = j.value("l1", d.l1);
  m.l2 = j.value("l2", d.l2);
  m.m1 = j.value("m1", d.m1);
  m.m2 = j.value("m2", d.m2);
  m.c1 = j.value("c1", d.c1);
  m.c2 = j.value("c2", d.c2);
  m.I1 = j.value("I1", d.I1);
  m.I2 = j.value("I2", d.I2);
  m.g = j.value("g", d.g);
  auto pair = [&](const char* key, Eigen::Vector2d& out) {
    if (!j.contains(key)) return;
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2) {
      throw Error(ErrorKind::kInvalidArgument, std::string(key) + " must be a 2-element array");
    }
    out = {a[0].get<double>(), a[1].get<double>()};
  };
  m.q_min = d.q_min;
  m.q_max = d.q_max;
  m.v_max = d.v_max;
  pair("q_min", m.q_min);
  pair("q_max", m.q_max);
  pair("v_max", m.v_max);
  m.validate();
}

}  // namespace reachirl
