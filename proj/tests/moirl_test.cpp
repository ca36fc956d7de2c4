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

#include <Eigen/Eigenvalues>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/math/tools/minima.hpp>
#include <gtest/gtest.h>

#include "reachirl/demo_io.hpp"
#include "reachirl/moirl.hpp"
#include "test_util.hpp"

namespace reachirl {
namespace {

using testing::Rng;
using HP = boost::multiprecision::cpp_bin_float_50;

WindowedFeatures feats(const Eigen::MatrixXd& m) { return WindowedFeatures{m}; }

TrajectorySet set_of(const std::vector<Eigen::MatrixXd>& phis, int group = 0) {
  TrajectorySet s;
  for (const auto& p : phis) s.entries.push_back({Trajectory{}, feats(p), group});
  return s;
}

TEST(DemoProbability, EmptySetIsOne) {
  const auto w = WeightSchedule::uniform(2);
  EXPECT_DOUBLE_EQ(demo_probability(w, feats(Eigen::MatrixXd::Ones(2, 7)), {}), 1.0);
}

TEST(DemoProbability, CopyOfDemoIsHalf) {
  const auto w = WeightSchedule::uniform(2);
  const Eigen::MatrixXd phi = Eigen::MatrixXd::Random(2, 7).cwiseAbs() * 50.0;
  EXPECT_NEAR(demo_probability(w, feats(phi), set_of({phi})), 0.5, 1e-15);
}

TEST(DemoProbability, MatchesDirectSumInHighPrecision) {
  Rng r(31);
  for (int i = 0; i < 20; ++i) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Random(3, 7).cwiseAbs();
    const Eigen::MatrixXd demo = Eigen::MatrixXd::Random(3, 7).cwiseAbs() * 10.0;
    std::vector<Eigen::MatrixXd> others;
    for (int k = 0; k < 3; ++k) others.push_back(demo + Eigen::MatrixXd::Constant(3, 7, r.uniform(-1.0, 1.0)));
    auto cost = [&](const Eigen::MatrixXd& phi) {
      HP c = 0;
      for (int s = 0; s < 3; ++s) {
        for (int k = 0; k < 7; ++k) c += HP(w(s, k)) * HP(phi(s, k));
      }
      return c;
    };
    HP denom = exp(-cost(demo));
    for (const auto& o : others) denom += exp(-cost(o));
    const double expected = static_cast<double>(exp(-cost(demo)) / denom);
    EXPECT_NEAR(demo_probability(WeightSchedule(w), feats(demo), set_of(others)), expected, 1e-14);
  }
}

TEST(DemoProbability, ShiftInvariantAndDecreasesWithCheaperEntry) {
  const auto w = WeightSchedule(Eigen::MatrixXd::Constant(1, 7, 1.0 / 7.0));
  const Eigen::MatrixXd demo = Eigen::MatrixXd::Constant(1, 7, 100.0);
  const std::vector<Eigen::MatrixXd> others = {demo.array() + 2.0, demo.array() - 1.0};
  const double p = demo_probability(w, feats(demo), set_of(others));
  // Adding c to every feature of every trajectory adds c to every cost.
  const Eigen::MatrixXd shifted = demo.array() + 500.0;
  const double q = demo_probability(w, feats(shifted),
                                    set_of({others[0].array() + 500.0, others[1].array() + 500.0}));
  EXPECT_NEAR(p, q, 1e-12);
  auto more = others;
  more.push_back(demo.array() - 3.0);
  EXPECT_LT(demo_probability(w, feats(demo), set_of(more)), p);
}

std::vector<DemoFeatures> demo_list(const std::vector<Eigen::MatrixXd>& phis) {
  std::vector<DemoFeatures> out;
  for (const auto& p : phis) out.push_back({feats(p), 0});
  return out;
}

TEST(DeltaW, IdenticalFeaturesGiveZeroStep) {
  const Eigen::MatrixXd phi = Eigen::MatrixXd::Random(2, 7).cwiseAbs();
  const auto u = delta_w_subproblem(WeightSchedule::uniform(2), demo_list({phi}), set_of({phi, phi}), {});
  EXPECT_TRUE(u.degenerate);
  EXPECT_EQ(u.dw, Eigen::MatrixXd::Zero(2, 7));
}

TEST(DeltaW, RequiresDemoAndSetEntry) {
  const Eigen::MatrixXd phi = Eigen::MatrixXd::Ones(1, 7);
  EXPECT_THROW(delta_w_subproblem(WeightSchedule::uniform(1), {}, set_of({phi}), {}), Error);
  EXPECT_THROW(delta_w_subproblem(WeightSchedule::uniform(1), demo_list({phi}), {}, {}), Error);
}

TEST(DeltaW, ScalarCaseMatchesGoldenSection) {
  // One window, only feature 4 differs by +1, w_n = 1.
  const Eigen::MatrixXd demo = Eigen::MatrixXd::Ones(1, 7);
  Eigen::MatrixXd other = demo;
  other(0, 3) += 1.0;
  IrlConfig cfg;
  const auto u = delta_w_subproblem(WeightSchedule(Eigen::MatrixXd::Ones(1, 7)), demo_list({demo}),
                                    set_of({other}), cfg);
  const double beta = cfg.beta;
  auto f = [beta](HP x) { return log1p(exp(-1 - x)) + beta / 2 * x * x; };
  const auto [xmin, fmin] = boost::math::tools::brent_find_minima(f, HP(0), HP(200), 150);
  EXPECT_NEAR(u.dw(0, 3), static_cast<double>(xmin), 1e-6);
  for (int k : {0, 1, 2, 4, 5, 6}) EXPECT_NEAR(u.dw(0, k), 0.0, 1e-12);
  EXPECT_GT(u.dw(0, 3), 10.0);
}

struct Problem {
  WeightSchedule w;
  std::vector<DemoFeatures> demos;
  TrajectorySet set;
};

Problem random_problem(Rng& r, int nw, int n_demos, int n_set, bool groups) {
  Problem p;
  p.w = WeightSchedule(Eigen::MatrixXd::Random(nw, 7).cwiseAbs());
  for (int d = 0; d < n_demos; ++d) {
    p.demos.push_back({feats(Eigen::MatrixXd::Random(nw, 7).cwiseAbs()), groups ? d % 2 : 0});
  }
  for (int i = 0; i < n_set; ++i) {
    Eigen::MatrixXd phi = Eigen::MatrixXd::Random(nw, 7).cwiseAbs();
    p.set.entries.push_back({Trajectory{}, feats(phi * r.uniform(0.5, 2.0)), groups ? i % 2 : 0});
  }
  return p;
}

TEST(DeltaW, GradientMatchesFiniteDifferencesAndHessianIsPsd) {
  Rng r(33);
  for (int i = 0; i < 10; ++i) {
    const auto p = random_problem(r, 3, 3, 6, i % 2 == 0);
    const double beta = i < 5 ? 1e-9 : 0.1;
    WeightUpdateObjective obj(p.w, p.demos, p.set, beta, true);
    const Eigen::VectorXd x = Eigen::VectorXd::Random(obj.size());
    Eigen::VectorXd g;
    Eigen::MatrixXd H;
    obj.evaluate(x, &g, &H);
    for (int j = 0; j < obj.size(); ++j) {
      const double h = 1e-6;
      Eigen::VectorXd xp = x, xn = x;
      xp[j] += h;
      xn[j] -= h;
      EXPECT_NEAR(g[j], (obj.value(xp) - obj.value(xn)) / (2 * h), 1e-6);
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
  }
}

TEST(DeltaW, SolutionIsStationaryAndRespectsBound) {
  Rng r(34);
  for (int i = 0; i < 10; ++i) {
    const auto p = random_problem(r, 4, 2, 5, false);
    IrlConfig cfg;
    cfg.beta = 1e-2;
    const auto u = delta_w_subproblem(p.w, p.demos, p.set, cfg);
    EXPECT_LE(u.projected_gradient_norm, cfg.subproblem_tol);
    EXPECT_TRUE(((p.w.w + u.dw).array() >= 0.0).all());
    EXPECT_TRUE(((p.w.w + u.dw).array() > 0.0).all());
    // Finite-difference gradient at the solution on free coordinates.
    WeightUpdateObjective obj(p.w, p.demos, p.set, cfg.beta, true);
    const Eigen::VectorXd x = detail::flatten(u.dw);
    const Eigen::VectorXd lb = -detail::flatten(p.w.w);
    for (int j = 0; j < obj.size(); ++j) {
      const double h = 1e-6;
      if (x[j] - h <= lb[j]) continue;
      Eigen::VectorXd xp = x, xn = x;
      xp[j] += h;
      xn[j] -= h;
      EXPECT_NEAR((obj.value(xp) - obj.value(xn)) / (2 * h), 0.0, 1e-6);
    }
  }
}

TEST(Merit, Examples) {
  const ArmModel m;
  Rng r(35);
  const auto a = testing::random_trajectory(r, m, 20, 0.01);
  EXPECT_EQ(merit(std::vector<Trajectory>{a}, std::vector<Trajectory>{a}), 0.0);
  auto b = a;
  for (auto& x : b.states) x.q[0] += 0.3;
  EXPECT_NEAR(merit(std::vector<Trajectory>{b}, std::vector<Trajectory>{a}), 0.09, 1e-15);
  const auto c = testing::random_trajectory(r, m, 20, 0.01);
  const auto d = testing::random_trajectory(r, m, 30, 0.01);
  const auto e = testing::random_trajectory(r, m, 30, 0.01);
  double direct = 0.0;
  for (const auto& [p, q] : {std::pair{&a, &c}, std::pair{&d, &e}}) {
    double s = 0.0;
    for (std::size_t t = 0; t < p->states.size(); ++t) {
      for (int k = 0; k < 2; ++k) {
        s += std::pow(p->states[t].q[k] - q->states[t].q[k], 2) + std::pow(p->states[t].v[k] - q->states[t].v[k], 2);
      }
    }
    direct += s / p->states.size();
  }
  EXPECT_NEAR(merit(std::vector<Trajectory>{a, d}, std::vector<Trajectory>{c, e}), direct / 2, 1e-12);
  try {
    merit(std::vector<Trajectory>{a}, std::vector<Trajectory>{d});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::kLengthMismatch);
  }
  EXPECT_THROW(merit(std::vector<Trajectory>{a}, std::vector<Trajectory>{a, c}), Error);
}

std::vector<Demonstration> stub_demos(int postures) {
  const ArmModel m;
  std::vector<Demonstration> out;
  for (int i = 0; i < postures; ++i) {
    Demonstration d;
    d.posture = kAllPostures[i];
    d.arm = m;
    d.target_x = protocol_target_x(m);
    std::vector<Control> u(10);
    const Eigen::Vector2d q0 = default_posture_angles(d.posture);
    for (int t = 0; t < 10; ++t) u[t].tau = gravity_torque(m, q0) + Eigen::Vector2d(0.5, -0.2) * std::sin(0.3 * t);
    d.traj = rollout(m, q0, u, 0.02);
    out.push_back(d);
  }
  return out;
}

// Hold torque fixed at gravity compensation plus an offset.
DocSolution offset_solution(const DocProblem& p, double offset) {
  DocSolution s;
  std::vector<Control> u(p.horizon, Control{gravity_torque(p.model, p.q0) + Eigen::Vector2d(offset, offset)});
  s.traj = rollout(p.model, p.q0, u, p.dt);
  s.converged = true;
  return s;
}

TEST(Run, ZeroIterationsReturnsInitialWeights) {
  IrlConfig cfg;
  cfg.max_iterations = 0;
  int calls = 0;
  const auto demos = stub_demos(2);
  const auto res = run(demos, cfg, [&](const DocProblem& p, const std::optional<Trajectory>&) {
    ++calls;
    return offset_solution(p, 1.0);
  });
  EXPECT_EQ(res.accepted_steps, 0);
  EXPECT_EQ(res.weights.w, WeightSchedule::uniform(5).w);
  EXPECT_EQ(res.terminated_reason, TerminationReason::kMaxIterations);
  EXPECT_EQ(calls, 2);
  EXPECT_EQ(res.merit_history.size(), 1u);
}

TEST(Run, StopsAfterTenShrinkingTrials) {
  IrlConfig cfg;
  const auto demos = stub_demos(2);
  const auto res = run(demos, cfg, [&](const DocProblem& p, const std::optional<Trajectory>&) {
    return offset_solution(p, 1.0);
  });
  EXPECT_EQ(res.terminated_reason, TerminationReason::kNoImprovingAlpha);
  EXPECT_EQ(res.accepted_steps, 0);
  ASSERT_EQ(res.trials.size(), 1u);
  ASSERT_EQ(res.trials[0].size(), 10u);
  for (int k = 0; k < 10; ++k) {
    EXPECT_DOUBLE_EQ(res.trials[0][k].alpha, std::pow(0.25, k));
    EXPECT_FALSE(res.trials[0][k].accepted);
  }
  EXPECT_EQ(res.observed_set_size, 2u);
}

TEST(Run, UnconvergedTrialsAreRejected) {
  IrlConfig cfg;
  cfg.max_iterations = 3;
  int calls = 0;
  const auto demos = stub_demos(1);
  const auto res = run(demos, cfg, [&](const DocProblem& p, const std::optional<Trajectory>&) {
    auto s = offset_solution(p, 1.0 / (1 + calls));
    s.converged = calls++ == 0;
    return s;
  });
  EXPECT_EQ(res.accepted_steps, 0);
  EXPECT_EQ(res.terminated_reason, TerminationReason::kNoImprovingAlpha);
  for (const auto& t : res.trials[0]) EXPECT_FALSE(t.solver_converged);
}

TEST(Run, AcceptedStepsGrowSetAndDecreaseMerit) {
  IrlConfig cfg;
  cfg.max_iterations = 4;
  const int P = 3;
  int calls = 0;
  const auto demos = stub_demos(P);
  const auto res = run(demos, cfg, [&](const DocProblem& p, const std::optional<Trajectory>&) {
    return offset_solution(p, 2.0 / (1 + calls++ / P));
  });
  EXPECT_EQ(res.accepted_steps, 4);
  EXPECT_EQ(res.observed_set_size, static_cast<std::size_t>(P + 4 * P));
  ASSERT_EQ(res.merit_history.size(), 5u);
  for (std::size_t i = 1; i < res.merit_history.size(); ++i) {
    EXPECT_LT(res.merit_history[i], res.merit_history[i - 1]);
  }
  EXPECT_TRUE((res.weights.w.array() >= 0.0).all());
  EXPECT_EQ(res.groups.size(), static_cast<std::size_t>(P));
  EXPECT_EQ(res.final_trajectories.size(), static_cast<std::size_t>(P));
}

TEST(Run, SeedingTheObservedSetWithDemos) {
  IrlConfig cfg;
  cfg.max_iterations = 0;
  cfg.demo_role = DemoRole::kSeedObservedSet;
  const auto res = run(stub_demos(2), cfg, [&](const DocProblem& p, const std::optional<Trajectory>&) {
    return offset_solution(p, 1.0);
  });
  EXPECT_EQ(res.observed_set_size, 4u);
}

TEST(TaskGroups, GroupBySubjectPostureAndHorizon) {
  auto demos = stub_demos(2);
  demos.push_back(demos[0]);
  demos.back().traj.states[0].q[0] += 0.02;
  demos.push_back(demos[1]);
  demos.back().subject_id = "S02";
  const auto g = make_task_groups(demos, 5);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0].demos, (std::vector<int>{0, 2}));
  EXPECT_NEAR(g[0].q0[0], demos[0].q0()[0] + 0.01, 1e-15);
  EXPECT_EQ(shared_window_count(demos), 5);
}

TEST(Run, RecoversSinglePostureDemonstration) {
  const ArmModel m;
  const int nw = 3;
  const auto w_true = rise_fall_weights(nw);
  SyntheticSpec spec;
  spec.posture = Posture::P1;
  spec.horizon = 18;
  spec.dt = 0.04;
  const Demonstration demo = generate_synthetic(m, w_true, spec);
  IrlConfig cfg;
  cfg.n_windows = nw;
  const auto res = run({demo}, cfg);
  ASSERT_FALSE(res.final_trajectories.empty());
  const auto& pred = res.final_trajectories[0].traj;
  double s = 0.0;
  for (std::size_t t = 0; t < pred.states.size(); ++t) {
    s += (pred.states[t].q - demo.traj.states[t].q).squaredNorm();
  }
  const double rmse_deg = std::sqrt(s / (2.0 * pred.states.size())) * kRadToDeg;
  EXPECT_LT(rmse_deg, 1.0);
  EXPECT_LT(res.merit_history.back(), res.merit_history.front());
}

TEST(IrlConfig, JsonRoundTripAndValidation) {
  IrlConfig c;
  c.beta = 0.5;
  c.max_iterations = 7;
  c.demo_role = DemoRole::kSeedObservedSet;
  const auto r = nlohmann::json(c).get<IrlConfig>();
  EXPECT_EQ(r.beta, 0.5);
  EXPECT_EQ(r.max_iterations, 7);
  EXPECT_EQ(r.demo_role, DemoRole::kSeedObservedSet);
  c.alpha_factor = 1.0;
  EXPECT_THROW(c.validate(), Error);
}

}  // namespace
}  // namespace reachirl
