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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "reachirl/arm.hpp"
#include "reachirl/csv.hpp"
#include "reachirl/demonstration.hpp"
#include "reachirl/doc_solver.hpp"
#include "reachirl/error.hpp"
#include "reachirl/features.hpp"
#include "reachirl/weights.hpp"

namespace reachirl {

inline constexpr int kDemoSchemaVersion = 1;

inline const char* demo_header_with_torque() { return "t,q1,q2,v1,v2,tau1,tau2"; }
inline const char* demo_header_states_only() { return "t,q1,q2,v1,v2"; }

/// Sidecar path for a demonstration CSV: same stem, ".json" extension.
inline std::string demo_sidecar_path(const std::string& csv_path) {
  return std::filesystem::path(csv_path).replace_extension(".json").string();
}

inline nlohmann::json demo_sidecar(const Demonstration& d, bool with_torque) {
  nlohmann::json j{{"schema_version", kDemoSchemaVersion},
                   {"subject", d.subject_id},
                   {"posture", to_string(d.posture)},
                   {"target_x", d.target_x},
                   {"dt", d.traj.dt},
                   {"horizon", d.horizon()},
                   {"n_samples", d.traj.states.size()},
                   {"duration", d.traj.duration()},
                   {"has_torque", with_torque},
                   {"arm", d.arm},
                   {"measured_initial_velocity",
                    {d.measured_initial_velocity[0], d.measured_initial_velocity[1]}}};
  if (d.w_true) {
    nlohmann::json rows = nlohmann::json::array();
    for (int s = 0; s < d.w_true->rows(); ++s) {
      nlohmann::json r = nlohmann::json::array();
      for (int k = 0; k < d.w_true->cols(); ++k) r.push_back((*d.w_true)(s, k));
      rows.push_back(r);
    }
    j["w_true"] = rows;
  } else {
    j["w_true"] = nullptr;
  }
  return j;
}

/// Writes `<stem>.csv` and its `<stem>.json` sidecar. The last CSV row has no
/// control after it; its torque columns are written as 0 and ignored on read.
inline void write_demo(const std::string& csv_path, const Demonstration& d, bool with_torque = true) {
  d.traj.validate();
  const auto parent = std::filesystem::path(csv_path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kInvalidArgument, "cannot write " + csv_path);
  out << (with_torque ? demo_header_with_torque() : demo_header_states_only()) << "\n";
  const int n = static_cast<int>(d.traj.states.size());
  for (int i = 0; i < n; ++i) {
    const State& s = d.traj.states[i];
    out << csv::format(i * d.traj.dt) << ',' << csv::format(s.q[0]) << ',' << csv::format(s.q[1])
        << ',' << csv::format(s.v[0]) << ',' << csv::format(s.v[1]);
    if (with_torque) {
      const Eigen::Vector2d tau = i + 1 < n ? d.traj.controls[i].tau : Eigen::Vector2d::Zero();
      out << ',' << csv::format(tau[0]) << ',' << csv::format(tau[1]);
    }
    out << "\n";
  }
  std::ofstream side(demo_sidecar_path(csv_path), std::ios::binary);
  if (!side) throw Error(ErrorKind::kInvalidArgument, "cannot write " + demo_sidecar_path(csv_path));
  side << demo_sidecar(d, with_torque).dump(2) << "\n";
}

/// Reads a demonstration written by write_demo. Files without torque columns
/// get torques from inverse dynamics of the state sequence.
inline Demonstration read_demo(const std::string& csv_path) {
  const std::string side_path = demo_sidecar_path(csv_path);
  std::ifstream side(side_path);
  if (!side) throw Error(ErrorKind::kParseError, "cannot open " + side_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(side);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(side_path, 1, static_cast<int>(e.byte), e.what());
  }
  Demonstration d;
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kDemoSchemaVersion) {
      throw Error(ErrorKind::kSchemaVersionMismatch,
                  side_path + ": schema_version " + std::to_string(version) + ", expected " +
                      std::to_string(kDemoSchemaVersion));
    }
    d.subject_id = j.at("subject").get<std::string>();
    d.posture = parse_posture(j.at("posture").get<std::string>());
    d.target_x = j.at("target_x").get<double>();
    d.traj.dt = j.at("dt").get<double>();
    d.arm = j.at("arm").get<ArmModel>();
    const auto v0 = j.at("measured_initial_velocity");
    d.measured_initial_velocity = {v0.at(0).get<double>(), v0.at(1).get<double>()};
    if (j.contains("w_true") && !j["w_true"].is_null()) {
      const auto& rows = j["w_true"];
      Eigen::MatrixXd w(static_cast<int>(rows.size()), kNumFeatures);
      for (std::size_t s = 0; s < rows.size(); ++s) {
        if (rows[s].size() != kNumFeatures) {
          throw Error(ErrorKind::kShapeMismatch, side_path + ": w_true rows need 7 entries");
        }
        for (int k = 0; k < kNumFeatures; ++k) w(static_cast<int>(s), k) = rows[s][k].get<double>();
      }
      d.w_true = w;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParseError, side_path + ": " + e.what());
  }
  const bool with_torque = j.value("has_torque", true);
  const auto table = csv::read_numeric(
      csv_path, {with_torque ? demo_header_with_torque() : demo_header_states_only()});
  const std::size_t n = table.rows.size();
  if (n != j.at("n_samples").get<std::size_t>()) {
    throw ParseError(csv_path, static_cast<int>(n) + 1, 1,
                     "sidecar declares " + std::to_string(j.at("n_samples").get<std::size_t>()) +
                         " samples, file has " + std::to_string(n));
  }
  if (n < 3) throw Error(ErrorKind::kTooShort, csv_path + ": a demonstration needs T_d >= 2");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = table.rows[i];
    const double expected_t = static_cast<double>(i) * d.traj.dt;
    if (std::abs(r[0] - expected_t) > 1e-9 * std::max(1.0, std::abs(expected_t))) {
      throw ParseError(csv_path, static_cast<int>(i) + 2, 1, "time does not match i * dt");
    }
    d.traj.states.push_back({{r[1], r[2]}, {r[3], r[4]}});
    if (with_torque && i + 1 < n) d.traj.controls.push_back({{r[5], r[6]}});
  }
  if (!with_torque) d.traj.controls = torques_from_states(d.arm, d.traj);
  d.validate();
  return d;
}

// ---------------------------------------------------------------------------
// Marker preprocessing

/// Shoulder, elbow and wrist marker positions per frame, world frame with +Z up.
struct MarkerFrames {
  std::vector<double> t;
  std::vector<Eigen::Vector3d> shoulder, elbow, wrist;

  std::size_t size() const { return t.size(); }
};

struct PreprocessOptions {
  double dt = 0.01;            // output sampling interval [s]
  double cutoff_hz = 8.0;      // velocity low-pass cutoff; <= 0 disables filtering
  double rigid_tolerance = 0.05;
};

inline void to_json(nlohmann::json& j, const PreprocessOptions& o) {
  j = nlohmann::json{{"dt", o.dt}, {"cutoff_hz", o.cutoff_hz}, {"rigid_tolerance", o.rigid_tolerance}};
}

inline void from_json(const nlohmann::json& j, PreprocessOptions& o) {
  const PreprocessOptions d;
  o.dt = j.value("dt", d.dt);
  o.cutoff_hz = j.value("cutoff_hz", d.cutoff_hz);
  o.rigid_tolerance = j.value("rigid_tolerance", d.rigid_tolerance);
}

/// Generic marker CSV: t,sx,sy,sz,ex,ey,ez,wx,wy,wz. Non-finite values are
/// accepted here and rejected by markers_to_joints.
inline MarkerFrames read_marker_csv(const std::string& path) {
  const auto table = csv::read_numeric(path, {"t,sx,sy,sz,ex,ey,ez,wx,wy,wz"}, false);
  MarkerFrames f;
  for (const auto& r : table.rows) {
    f.t.push_back(r[0]);
    f.shoulder.emplace_back(r[1], r[2], r[3]);
    f.elbow.emplace_back(r[4], r[5], r[6]);
    f.wrist.emplace_back(r[7], r[8], r[9]);
  }
  return f;
}

/// Synthetic markers from joint angles: the arm moves in the world X-Z plane
/// with the shoulder at `shoulder`.
inline MarkerFrames joints_to_markers(const ArmModel& m, const std::vector<double>& t,
                                      const std::vector<Eigen::Vector2d>& q,
                                      const Eigen::Vector3d& shoulder = Eigen::Vector3d::Zero()) {
  MarkerFrames f;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double a = q[i][0], b = q[i][0] + q[i][1];
    const Eigen::Vector3d e = shoulder + Eigen::Vector3d(m.l1 * std::cos(a), 0.0, m.l1 * std::sin(a));
    f.t.push_back(t[i]);
    f.shoulder.push_back(shoulder);
    f.elbow.push_back(e);
    f.wrist.push_back(e + Eigen::Vector3d(m.l2 * std::cos(b), 0.0, m.l2 * std::sin(b)));
  }
  return f;
}

namespace detail {

inline void check_frames(const MarkerFrames& f) {
  const std::size_t n = f.t.size();
  if (f.shoulder.size() != n || f.elbow.size() != n || f.wrist.size() != n) {
    throw Error(ErrorKind::kLengthMismatch, "marker arrays have different lengths");
  }
  if (n < 2) throw Error(ErrorKind::kTooShort, "marker preprocessing needs at least 2 frames");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(f.t[i]) || !f.shoulder[i].allFinite() || !f.elbow[i].allFinite() ||
        !f.wrist[i].allFinite()) {
      throw Error(ErrorKind::kInvalidArgument, "non-finite marker data in frame " + std::to_string(i));
    }
    if (i > 0 && !(f.t[i] > f.t[i - 1])) {
      throw Error(ErrorKind::kInvalidArgument, "timestamps must increase (frame " + std::to_string(i) + ")");
    }
  }
}

inline void check_rigid(const std::vector<Eigen::Vector3d>& a, const std::vector<Eigen::Vector3d>& b,
                        double tol, const char* name) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double l = (b[i] - a[i]).norm();
    lo = std::min(lo, l);
    hi = std::max(hi, l);
    mean += l;
  }
  mean /= static_cast<double>(a.size());
  if (!(mean > 0.0) || (hi - lo) / mean > tol) {
    throw Error(ErrorKind::kNonRigid, std::string(name) + " length varies by " +
                                          std::to_string(100.0 * (hi - lo) / mean) + "%");
  }
}

inline double wrap_angle(double a) { return std::remainder(a, 2.0 * M_PI); }

// Second-order Butterworth low-pass (bilinear transform), direct form II
// transposed, run forward then backward with odd reflection padding.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

inline Biquad butterworth2(double cutoff_hz, double fs) {
  const double K = std::tan(M_PI * cutoff_hz / fs);
  const double norm = 1.0 / (1.0 + std::sqrt(2.0) * K + K * K);
  Biquad f;
  f.b0 = K * K * norm;
  f.b1 = 2.0 * f.b0;
  f.b2 = f.b0;
  f.a1 = 2.0 * (K * K - 1.0) * norm;
  f.a2 = (1.0 - std::sqrt(2.0) * K + K * K) * norm;
  return f;
}

inline std::vector<double> lfilter(const Biquad& f, const std::vector<double>& x) {
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  // Steady state for a constant input equal to x[0] (unit DC gain).
  double z1 = (1.0 - f.b0) * x[0], z2 = (f.b2 - f.a2) * x[0];
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = f.b0 * x[i] + z1;
    z1 = f.b1 * x[i] - f.a1 * y[i] + z2;
    z2 = f.b2 * x[i] - f.a2 * y[i];
  }
  return y;
}

inline std::vector<double> filtfilt(const Biquad& f, const std::vector<double>& x) {
  const std::size_t n = x.size();
  const std::size_t pad = std::min<std::size_t>(9, n > 0 ? n - 1 : 0);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);
  auto y = lfilter(f, ext);
  std::reverse(y.begin(), y.end());
  y = lfilter(f, y);
  std::reverse(y.begin(), y.end());
  return std::vector<double>(y.begin() + pad, y.begin() + pad + n);
}

}  // namespace detail

inline std::vector<double> lowpass_zero_phase(const std::vector<double>& x, double cutoff_hz, double fs) {
  if (!(cutoff_hz > 0.0) || cutoff_hz >= 0.5 * fs || x.size() < 2) return x;
  return detail::filtfilt(detail::butterworth2(cutoff_hz, fs), x);
}

/// Joint angles at the original frame times, before resampling and filtering.
/// The motion plane is the least-squares plane through all markers; its
/// vertical axis is world +Z projected into the plane and +X points toward the
/// final wrist position.
inline std::vector<Eigen::Vector2d> marker_joint_angles(const MarkerFrames& f,
                                                        double rigid_tolerance = 0.05) {
  detail::check_frames(f);
  detail::check_rigid(f.shoulder, f.elbow, rigid_tolerance, "upper arm");
  detail::check_rigid(f.elbow, f.wrist, rigid_tolerance, "forearm");
  const std::size_t n = f.size();

  Eigen::MatrixXd pts(3 * n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    pts.row(3 * i) = f.shoulder[i].transpose();
    pts.row(3 * i + 1) = f.elbow[i].transpose();
    pts.row(3 * i + 2) = f.wrist[i].transpose();
  }
  const Eigen::RowVector3d centroid = pts.colwise().mean();
  pts.rowwise() -= centroid;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(pts, Eigen::ComputeThinV);
  const Eigen::Vector3d normal = svd.matrixV().col(2);

  Eigen::Vector3d up = Eigen::Vector3d::UnitZ() - normal.dot(Eigen::Vector3d::UnitZ()) * normal;
  if (up.norm() < 1e-6) throw Error(ErrorKind::kDegenerate, "motion plane is horizontal");
  up.normalize();
  Eigen::Vector3d fwd = up.cross(normal);
  if ((f.wrist.back() - f.shoulder.back()).dot(fwd) < 0.0) fwd = -fwd;

  std::vector<Eigen::Vector2d> q(n);
  double prev1 = 0.0, prev2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d u = f.elbow[i] - f.shoulder[i];
    const Eigen::Vector3d w = f.wrist[i] - f.elbow[i];
    double q1 = std::atan2(u.dot(up), u.dot(fwd));
    double q2 = detail::wrap_angle(std::atan2(w.dot(up), w.dot(fwd)) - q1);
    if (i > 0) {
      q1 = prev1 + detail::wrap_angle(q1 - prev1);
      q2 = prev2 + detail::wrap_angle(q2 - prev2);
    }
    q[i] = {q1, q2};
    prev1 = q1;
    prev2 = q2;
  }
  return q;
}

struct PreprocessResult {
  Trajectory traj;
  Eigen::Vector2d measured_initial_velocity = Eigen::Vector2d::Zero();
};

/// Markers to a uniformly sampled joint trajectory starting at rest. Angles are
/// linearly resampled, velocities come from central differences followed by
/// the zero-phase low-pass, and torques from inverse dynamics of `arm`.
inline PreprocessResult markers_to_joints(const MarkerFrames& f, const ArmModel& arm,
                                          const PreprocessOptions& opts = {}) {
  if (!(opts.dt > 0.0)) throw Error(ErrorKind::kInvalidArgument, "dt must be > 0");
  const auto raw = marker_joint_angles(f, opts.rigid_tolerance);
  const double t0 = f.t.front();
  const double span = f.t.back() - t0;
  const int n = static_cast<int>(std::floor(span / opts.dt + 1e-9)) + 1;
  if (n < 3) throw Error(ErrorKind::kTooShort, "recording shorter than two output samples");

  std::vector<Eigen::Vector2d> q(n);
  std::size_t k = 0;
  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * opts.dt;
    while (k + 2 < f.size() && f.t[k + 1] <= t) ++k;
    const double s = std::clamp((t - f.t[k]) / (f.t[k + 1] - f.t[k]), 0.0, 1.0);
    q[i] = (1.0 - s) * raw[k] + s * raw[k + 1];
  }

  std::vector<double> v1(n), v2(n);
  for (int i = 0; i < n; ++i) {
    const int a = std::max(0, i - 1), b = std::min(n - 1, i + 1);
    const Eigen::Vector2d d = (q[b] - q[a]) / ((b - a) * opts.dt);
    v1[i] = d[0];
    v2[i] = d[1];
  }
  const double fs = 1.0 / opts.dt;
  v1 = lowpass_zero_phase(v1, opts.cutoff_hz, fs);
  v2 = lowpass_zero_phase(v2, opts.cutoff_hz, fs);

  PreprocessResult out;
  out.measured_initial_velocity = {v1[0], v2[0]};
  out.traj.dt = opts.dt;
  for (int i = 0; i < n; ++i) out.traj.states.push_back({q[i], {v1[i], v2[i]}});
  out.traj.states[0].v.setZero();
  out.traj.controls = torques_from_states(arm, out.traj);
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic demonstrations

struct SyntheticSpec {
  std::string subject_id = "S01";
  Posture posture = Posture::P1;
  std::optional<Eigen::Vector2d> q0;  // defaults to the posture's angles
  int horizon = 30;
  double dt = 0.03;
  double noise_std = 0.0;  // joint-angle noise [rad], applied to samples t >= 1
  std::uint64_t seed = 0;
};

/// DOC solution at w_true from the posture, optionally with seeded Gaussian
/// noise on the joint angles. Noisy demonstrations carry torques re-estimated
/// from the noisy states.
inline Demonstration generate_synthetic(const ArmModel& model, const WeightSchedule& w_true,
                                        const SyntheticSpec& spec, const SolverOptions& opts = {}) {
  DocProblem p;
  p.model = model;
  p.q0 = spec.q0 ? *spec.q0 : default_posture_angles(spec.posture);
  p.target_x = protocol_target_x(model);
  p.horizon = spec.horizon;
  p.dt = spec.dt;
  p.plan = make_window_plan(spec.horizon, w_true.n_windows());
  p.weights = w_true;
  const DocSolution sol = solve(p, opts);
  if (!sol.converged) {
    throw Error(ErrorKind::kNumericalFailure,
                "synthetic DOC solve did not converge for " + to_string(spec.posture) +
                    " (violation " + std::to_string(sol.constraint_violation) + ", kkt " +
                    std::to_string(sol.kkt_residual) + ")");
  }
  Demonstration d;
  d.subject_id = spec.subject_id;
  d.posture = spec.posture;
  d.traj = sol.traj;
  d.target_x = p.target_x;
  d.arm = model;
  d.w_true = w_true.w;
  if (spec.noise_std > 0.0) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_std);
    for (std::size_t t = 1; t < d.traj.states.size(); ++t) {
      d.traj.states[t].q[0] += noise(rng);
      d.traj.states[t].q[1] += noise(rng);
    }
    d.traj.controls = torques_from_states(model, d.traj);
  }
  return d;
}

/// Phi4-dominant schedule: joint-acceleration weight rising from `phi4_base`
/// to `phi4_base + phi4_peak` at mid-reach and falling back, plus a constant
/// joint-torque weight.
struct ProfileSpec {
  double phi4_base = 0.25;
  double phi4_peak = 1.0;
  double phi7 = 0.02;
};

inline WeightSchedule rise_fall_weights(int n_windows, const ProfileSpec& p = {}) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n_windows, kNumFeatures);
  for (int s = 0; s < n_windows; ++s) {
    const double tau = (s + 0.5) / n_windows;
    w(s, 3) = p.phi4_base + p.phi4_peak * std::sin(M_PI * tau);
    w(s, 6) = p.phi7;
  }
  return WeightSchedule(w);
}

inline void to_json(nlohmann::json& j, const ProfileSpec& p) {
  j = nlohmann::json{{"phi4_base", p.phi4_base}, {"phi4_peak", p.phi4_peak}, {"phi7", p.phi7}};
}

inline void from_json(const nlohmann::json& j, ProfileSpec& p) {
  const ProfileSpec d;
  p.phi4_base = j.value("phi4_base", d.phi4_base);
  p.phi4_peak = j.value("phi4_peak", d.phi4_peak);
  p.phi7 = j.value("phi7", d.phi7);
}

struct DatasetSpec {
  int subjects = 1;
  std::vector<Posture> postures{kAllPostures.begin(), kAllPostures.end()};
  int trials = 2;               // per subject and posture
  int horizon = 20;
  double dt = 0.04;
  double noise_std = 0.0;       // joint-angle noise [rad]
  double q0_jitter = 0.0;       // uniform start-posture perturbation half-width [rad]
  std::uint64_t seed = 0;
};

inline std::string subject_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "S%02d", i + 1);
  return buf;
}

/// Synthetic demonstrations for every subject, posture and trial, in that
/// order. Each trial draws its start perturbation and noise from its own
/// stream seeded by (seed, subject, posture, trial).
inline std::vector<Demonstration> synthetic_dataset(const ArmModel& model, const WeightSchedule& w_true,
                                                    const DatasetSpec& spec,
                                                    const SolverOptions& opts = {},
                                                    const std::map<Posture, Eigen::Vector2d>& angles = {}) {
  std::vector<Demonstration> out;
  for (int s = 0; s < spec.subjects; ++s) {
    for (Posture p : spec.postures) {
      for (int k = 0; k < spec.trials; ++k) {
        std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                          static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(p),
                          static_cast<std::uint32_t>(k)};
        std::mt19937_64 rng(seq);
        SyntheticSpec ss;
        ss.subject_id = subject_name(s);
        ss.posture = p;
        ss.horizon = spec.horizon;
        ss.dt = spec.dt;
        ss.noise_std = spec.noise_std;
        ss.seed = rng();
        Eigen::Vector2d q0 = angles.count(p) ? angles.at(p) : default_posture_angles(p);
        if (spec.q0_jitter > 0.0) {
          for (int j = 0; j < 2; ++j) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            q0[j] += spec.q0_jitter * (2.0 * u - 1.0);
          }
          q0 = q0.cwiseMax(model.q_min).cwiseMin(model.q_max);
        }
        ss.q0 = q0;
        out.push_back(generate_synthetic(model, w_true, ss, opts));
      }
    }
  }
  return out;
}

}  // namespace reachirl
