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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "reachirl/demo_io.hpp"
#include "test_util.hpp"

namespace reachirl {
namespace {

namespace fs = std::filesystem;
using testing::Rng;

std::string temp_dir(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("reachirl_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

Demonstration sample_demo(int T = 20, double dt = 0.01) {
  const ArmModel m;
  Rng r(41);
  Demonstration d;
  d.subject_id = "S07";
  d.posture = Posture::P3;
  d.arm = m;
  d.target_x = protocol_target_x(m);
  d.traj = testing::random_trajectory(r, m, T, dt);
  d.w_true = Eigen::MatrixXd::Constant(2, kNumFeatures, 0.125);
  return d;
}

void expect_same(const Demonstration& a, const Demonstration& b) {
  EXPECT_EQ(a.subject_id, b.subject_id);
  EXPECT_EQ(a.posture, b.posture);
  EXPECT_EQ(a.target_x, b.target_x);
  EXPECT_EQ(a.traj.dt, b.traj.dt);
  ASSERT_EQ(a.traj.states.size(), b.traj.states.size());
  for (std::size_t t = 0; t < a.traj.states.size(); ++t) EXPECT_EQ(a.traj.states[t], b.traj.states[t]) << t;
  EXPECT_EQ(a.arm.l1, b.arm.l1);
  EXPECT_EQ(a.arm.q_max, b.arm.q_max);
  EXPECT_EQ(a.w_true.has_value(), b.w_true.has_value());
  if (a.w_true && b.w_true) EXPECT_EQ(*a.w_true, *b.w_true);
}

TEST(DemoFile, RoundTripWithTorques) {
  const auto dir = temp_dir("rt");
  const auto d = sample_demo();
  write_demo(dir + "/d.csv", d);
  const auto r = read_demo(dir + "/d.csv");
  expect_same(d, r);
  ASSERT_EQ(r.traj.controls.size(), d.traj.controls.size());
  for (std::size_t t = 0; t < d.traj.controls.size(); ++t) EXPECT_EQ(r.traj.controls[t], d.traj.controls[t]);
}

TEST(DemoFile, StatesOnlyFileRecoversTorquesByInverseDynamics) {
  const auto dir = temp_dir("states");
  const auto d = sample_demo();
  write_demo(dir + "/d.csv", d, false);
  const auto r = read_demo(dir + "/d.csv");
  expect_same(d, r);
  for (std::size_t t = 0; t < d.traj.controls.size(); ++t) {
    EXPECT_LT((r.traj.controls[t].tau - d.traj.controls[t].tau).norm(), 1e-8 * (1 + d.traj.controls[t].tau.norm()));
  }
}

TEST(DemoFile, SidecarDeclaresDuration) {
  const auto dir = temp_dir("dur");
  const auto d = sample_demo(200, 0.005);
  write_demo(dir + "/d.csv", d);
  const auto j = nlohmann::json::parse(slurp(demo_sidecar_path(dir + "/d.csv")));
  EXPECT_DOUBLE_EQ(j.at("duration").get<double>(), 1.0);
  EXPECT_EQ(j.at("horizon").get<int>(), 200);
  EXPECT_EQ(j.at("n_samples").get<int>(), 201);
  EXPECT_EQ(j.at("schema_version").get<int>(), kDemoSchemaVersion);
}

TEST(DemoFile, WrongColumnCountIsParseError) {
  const auto dir = temp_dir("cols");
  write_demo(dir + "/d.csv", sample_demo());
  std::string text = slurp(dir + "/d.csv");
  const auto third = text.find('\n', text.find('\n', text.find('\n') + 1) + 1);
  text.insert(third, ",9");
  spit(dir + "/d.csv", text);
  try {
    read_demo(dir + "/d.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParseError);
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(DemoFile, SchemaVersionMismatch) {
  const auto dir = temp_dir("schema");
  write_demo(dir + "/d.csv", sample_demo());
  auto j = nlohmann::json::parse(slurp(dir + "/d.json"));
  j["schema_version"] = kDemoSchemaVersion + 1;
  spit(dir + "/d.json", j.dump());
  try {
    read_demo(dir + "/d.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSchemaVersionMismatch);
  }
}

TEST(DemoFile, SampleCountMustMatchSidecar) {
  const auto dir = temp_dir("count");
  write_demo(dir + "/d.csv", sample_demo());
  std::string text = slurp(dir + "/d.csv");
  text.erase(text.rfind('\n', text.size() - 2) + 1);
  spit(dir + "/d.csv", text);
  EXPECT_THROW(read_demo(dir + "/d.csv"), Error);
}

std::vector<double> times(int n, double dt) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = i * dt;
  return t;
}

TEST(Markers, JointAnglesRoundTripThroughForwardKinematics) {
  const ArmModel m;
  Rng r(42);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 60;
    std::vector<Eigen::Vector2d> q(n);
    // Reaches end in front of the shoulder, which fixes the forward direction.
    const Eigen::Vector2d a = testing::random_q(r, m);
    Eigen::Vector2d b = testing::random_q(r, m);
    while (forward_kinematics(m, b)[0] < 0.05) b = testing::random_q(r, m);
    for (int i = 0; i < n; ++i) {
      const double s = 0.5 - 0.5 * std::cos(M_PI * i / (n - 1));
      q[i] = a + s * (b - a);
    }
    const auto f = joints_to_markers(m, times(n, 0.01), q, r.vec(-1, 1).homogeneous());
    const auto back = marker_joint_angles(f);
    for (int i = 0; i < n; ++i) {
      EXPECT_LT((back[i] - q[i]).cwiseAbs().maxCoeff(), 1e-10) << trial << " " << i;
    }
  }
}

TEST(Markers, TiltedPlaneIsRecovered) {
  const ArmModel m;
  std::vector<Eigen::Vector2d> q;
  for (int i = 0; i < 30; ++i) q.push_back({0.1 + 0.02 * i, 1.2 - 0.01 * i});
  auto f = joints_to_markers(m, times(30, 0.01), q);
  const Eigen::Matrix3d R = Eigen::AngleAxisd(0.7, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  for (auto* v : {&f.shoulder, &f.elbow, &f.wrist}) {
    for (auto& p : *v) p = R * p + Eigen::Vector3d(2.0, -1.0, 1.5);
  }
  const auto back = marker_joint_angles(f);
  for (std::size_t i = 0; i < q.size(); ++i) EXPECT_LT((back[i] - q[i]).norm(), 1e-10);
}

TEST(Markers, StaticMarkersGiveZeroVelocity) {
  const ArmModel m;
  const std::vector<Eigen::Vector2d> q(50, Eigen::Vector2d(0.3, 1.0));
  const auto res = markers_to_joints(joints_to_markers(m, times(50, 0.01), q), m);
  for (const auto& x : res.traj.states) {
    EXPECT_LT(x.v.norm(), 1e-12);
    EXPECT_LT((x.q - q[0]).norm(), 1e-12);
  }
  EXPECT_LT(res.measured_initial_velocity.norm(), 1e-12);
}

TEST(Markers, ResamplesAndStartsAtRest) {
  const ArmModel m;
  std::vector<Eigen::Vector2d> q;
  for (int i = 0; i < 101; ++i) q.push_back({0.2 + 0.5 * i / 100.0, 1.3});
  PreprocessOptions o;
  o.dt = 0.02;
  const auto res = markers_to_joints(joints_to_markers(m, times(101, 0.005), q), m, o);
  EXPECT_EQ(res.traj.states.size(), 26u);
  EXPECT_EQ(res.traj.states[0].v, Eigen::Vector2d::Zero());
  EXPECT_NEAR(res.measured_initial_velocity[0], 1.0, 1e-6);
  EXPECT_NEAR(res.traj.states[10].v[0], 1.0, 1e-6);
  EXPECT_NEAR(res.traj.states[10].q[0], 0.4, 1e-12);
  EXPECT_EQ(res.traj.controls.size(), 25u);
}

TEST(Markers, NanFrameIsRejected) {
  const ArmModel m;
  const std::vector<Eigen::Vector2d> q(20, Eigen::Vector2d(0.3, 1.0));
  auto f = joints_to_markers(m, times(20, 0.01), q);
  f.elbow[7][1] = std::nan("");
  EXPECT_THROW(markers_to_joints(f, m), Error);
}

TEST(Markers, NonRigidSegmentsAreRejected) {
  const ArmModel m;
  std::vector<Eigen::Vector2d> q(20, Eigen::Vector2d(0.3, 1.0));
  auto f = joints_to_markers(m, times(20, 0.01), q);
  f.wrist[10] = f.elbow[10] + 1.1 * (f.wrist[10] - f.elbow[10]);
  try {
    markers_to_joints(f, m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonRigid);
  }
}

TEST(Markers, TooShortAndNonMonotone) {
  const ArmModel m;
  auto f = joints_to_markers(m, {0.0}, {Eigen::Vector2d(0.3, 1.0)});
  try {
    markers_to_joints(f, m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTooShort);
  }
  f = joints_to_markers(m, {0.0, 0.02, 0.01}, std::vector<Eigen::Vector2d>(3, {0.3, 1.0}));
  EXPECT_THROW(markers_to_joints(f, m), Error);
}

TEST(Markers, CsvReader) {
  const auto dir = temp_dir("markers");
  spit(dir + "/m.csv", "t,sx,sy,sz,ex,ey,ez,wx,wy,wz\n0,0,0,0,0.3,0,0,0.63,0,0\n0.01,0,0,0,0.3,0,0,0.6,0,0.1\n");
  const auto f = read_marker_csv(dir + "/m.csv");
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f.wrist[1], Eigen::Vector3d(0.6, 0.0, 0.1));
}

TEST(Filter, ZeroPhaseLowPass) {
  const double fs = 100.0;
  std::vector<double> slow(400), fast(400), step(400);
  for (int i = 0; i < 400; ++i) {
    slow[i] = std::sin(2 * M_PI * 1.0 * i / fs);
    fast[i] = std::sin(2 * M_PI * 40.0 * i / fs);
    step[i] = 3.0;
  }
  const auto a = lowpass_zero_phase(slow, 8.0, fs);
  const auto b = lowpass_zero_phase(fast, 8.0, fs);
  const auto c = lowpass_zero_phase(step, 8.0, fs);
  double ea = 0.0, eb = 0.0, ec = 0.0;
  for (int i = 50; i < 350; ++i) {
    ea = std::max(ea, std::abs(a[i] - slow[i]));
    eb = std::max(eb, std::abs(b[i]));
  }
  for (double v : c) ec = std::max(ec, std::abs(v - 3.0));
  EXPECT_LT(ea, 0.01);  // passband, no phase lag
  EXPECT_LT(eb, 0.01);  // stopband
  EXPECT_LT(ec, 1e-12);
  EXPECT_EQ(lowpass_zero_phase(slow, 0.0, fs), slow);
}

TEST(Synthetic, NoiseFreeDemoSatisfiesConstraints) {
  const ArmModel m;
  SyntheticSpec spec;
  spec.posture = Posture::P2;
  spec.horizon = 16;
  spec.dt = 0.04;
  const auto w = rise_fall_weights(8);
  const auto d = generate_synthetic(m, w, spec);
  EXPECT_NEAR(forward_kinematics(m, d.traj.states.back().q)[0], protocol_target_x(m), 1e-4);
  EXPECT_EQ(d.q0(), default_posture_angles(Posture::P2));
  ASSERT_TRUE(d.w_true);
  EXPECT_EQ(*d.w_true, w.w);
  // Re-solving from the demo's start reproduces it exactly.
  const auto again = generate_synthetic(m, w, spec);
  EXPECT_EQ(again.traj, d.traj);
}

TEST(Synthetic, NoiseIsSeededAndOnlyAfterTheStart) {
  const ArmModel m;
  SyntheticSpec spec;
  spec.horizon = 12;
  spec.dt = 0.04;
  const auto w = rise_fall_weights(6);
  const auto clean = generate_synthetic(m, w, spec);
  spec.noise_std = 0.01;
  spec.seed = 5;
  const auto a = generate_synthetic(m, w, spec);
  const auto b = generate_synthetic(m, w, spec);
  spec.seed = 6;
  const auto c = generate_synthetic(m, w, spec);
  EXPECT_EQ(a.traj, b.traj);
  EXPECT_NE(a.traj, c.traj);
  EXPECT_EQ(a.traj.states[0], clean.traj.states[0]);
  EXPECT_NE(a.traj.states[1].q, clean.traj.states[1].q);
}

TEST(Synthetic, DatasetFilesAreByteIdentical) {
  const ArmModel m;
  DatasetSpec spec;
  spec.postures = {Posture::P1, Posture::P4};
  spec.trials = 2;
  spec.horizon = 10;
  spec.dt = 0.05;
  spec.noise_std = 0.005;
  spec.q0_jitter = 0.03;
  spec.seed = 99;
  const auto w = rise_fall_weights(5);
  const auto a = synthetic_dataset(m, w, spec);
  const auto b = synthetic_dataset(m, w, spec);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_NE(a[0].q0(), a[1].q0());
  const auto d1 = temp_dir("bytes1"), d2 = temp_dir("bytes2");
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string name = "/" + std::to_string(i) + ".csv";
    write_demo(d1 + name, a[i]);
    write_demo(d2 + name, b[i]);
    EXPECT_EQ(slurp(d1 + name), slurp(d2 + name));
    EXPECT_EQ(slurp(demo_sidecar_path(d1 + name)), slurp(demo_sidecar_path(d2 + name)));
  }
}

TEST(PreprocessOptions, JsonRoundTrip) {
  PreprocessOptions o;
  o.dt = 0.004;
  o.cutoff_hz = 6.0;
  const auto r = nlohmann::json(o).get<PreprocessOptions>();
  EXPECT_EQ(r.dt, o.dt);
  EXPECT_EQ(r.cutoff_hz, o.cutoff_hz);
}

}  // namespace
}  // namespace reachirl
