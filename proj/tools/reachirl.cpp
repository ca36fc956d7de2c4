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

// Command-line driver: synthetic data, preprocessing, features, forward
// solves, learning studies, evaluation and plot data.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "reachirl/config.hpp"
#include "reachirl/demo_io.hpp"
#include "reachirl/doc_solver.hpp"
#include "reachirl/features.hpp"
#include "reachirl/moirl.hpp"
#include "reachirl/study.hpp"

namespace fs = std::filesystem;
using namespace reachirl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON config file (defaults when omitted)");
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--out", c.out, "output directory");
}

ExperimentConfig config_of(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig() : load_config(c.config);
  if (c.seed) {
    cfg.dataset.seed = *c.seed;
    cfg.irl.seed = *c.seed;
  }
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kInvalidArgument, "cannot write " + path.string());
  out << text;
}

std::string trajectory_csv(const Trajectory& t) {
  std::string s = std::string(demo_header_with_torque()) + "\n";
  for (std::size_t i = 0; i < t.states.size(); ++i) {
    const auto& x = t.states[i];
    const Eigen::Vector2d u = i < t.controls.size() ? t.controls[i].tau : Eigen::Vector2d::Zero();
    s += csv::format(static_cast<double>(i) * t.dt) + "," + csv::format(x.q[0]) + "," + csv::format(x.q[1]) +
         "," + csv::format(x.v[0]) + "," + csv::format(x.v[1]) + "," + csv::format(u[0]) + "," +
         csv::format(u[1]) + "\n";
  }
  return s;
}

int cmd_synth(const Common& c) {
  const ExperimentConfig cfg = config_of(c);
  const WeightSchedule w = rise_fall_weights(cfg.dataset.horizon / 2, cfg.profile);
  const auto demos = synthetic_dataset(cfg.arm, w, cfg.dataset, cfg.irl.solver, cfg.postures);
  Manifest m;
  std::map<std::pair<std::string, Posture>, int> count;
  for (const auto& d : demos) {
    const int k = count[{d.subject_id, d.posture}]++;
    char name[64];
    std::snprintf(name, sizeof(name), "%s/%s_%02d.csv", d.subject_id.c_str(), to_string(d.posture).c_str(), k);
    write_demo((fs::path(c.out) / name).string(), d);
    m.entries.push_back({d.subject_id, d.posture, name});
  }
  fs::create_directories(c.out);
  write_manifest((fs::path(c.out) / "manifest.json").string(), m);
  write_window_matrix_csv((fs::path(c.out) / "w_true.csv").string(), w.w);
  std::cout << "wrote " << demos.size() << " demonstrations to " << c.out << "\n";
  return kExitOk;
}

int cmd_preprocess(const Common& c, const std::string& input, const std::string& subject,
                   const std::string& posture) {
  const ExperimentConfig cfg = config_of(c);
  const MarkerFrames frames = read_marker_csv(input);
  const PreprocessResult r = markers_to_joints(frames, cfg.arm, cfg.preprocess);
  Demonstration d;
  d.subject_id = subject;
  d.posture = parse_posture(posture);
  d.traj = r.traj;
  d.arm = cfg.arm;
  d.target_x = protocol_target_x(cfg.arm);
  d.measured_initial_velocity = r.measured_initial_velocity;
  const fs::path out = fs::path(c.out) / (subject + "_" + to_string(d.posture) + ".csv");
  write_demo(out.string(), d);
  std::cout << "wrote " << out.string() << " (" << d.traj.states.size() << " samples)\n";
  return kExitOk;
}

int cmd_features(const Common& c, const std::string& demo_path, int windows) {
  const ExperimentConfig cfg = config_of(c);
  const Demonstration d = read_demo(demo_path);
  const WindowPlan plan = windows > 0 ? make_window_plan(d.horizon(), windows) : make_window_plan(d.horizon());
  FeatureOptions fo;
  fo.energy = cfg.irl.solver.energy_form;
  const auto f = windowed_features(d.arm, d.traj, plan, fo);
  const fs::path out = fs::path(c.out) / "features.csv";
  fs::create_directories(c.out);
  write_window_matrix_csv(out.string(), f.phi);
  std::cout << "wrote " << out.string() << "\n";
  return kExitOk;
}

int cmd_simulate(const Common& c, const std::string& weights_path, const std::string& posture,
                 int horizon, double dt) {
  const ExperimentConfig cfg = config_of(c);
  const WeightSchedule w(read_window_matrix_csv(weights_path));
  DocProblem p;
  p.model = cfg.arm;
  p.q0 = cfg.posture_angles(parse_posture(posture));
  p.target_x = protocol_target_x(cfg.arm);
  p.horizon = horizon > 0 ? horizon : cfg.dataset.horizon;
  p.dt = dt > 0.0 ? dt : cfg.dataset.dt;
  p.plan = make_window_plan(p.horizon, w.n_windows());
  p.weights = w;
  const DocSolution s = solve(p, cfg.irl.solver);
  write_text(fs::path(c.out) / "trajectory.csv", trajectory_csv(s.traj));
  const nlohmann::json j{{"posture", posture},
                         {"objective", s.objective},
                         {"kkt_residual", s.kkt_residual},
                         {"constraint_violation", s.constraint_violation},
                         {"iterations", s.iterations},
                         {"converged", s.converged}};
  write_text(fs::path(c.out) / "solution.json", j.dump(2) + "\n");
  std::cout << "objective " << s.objective << ", violation " << s.constraint_violation << ", converged "
            << (s.converged ? "yes" : "no") << "\n";
  return s.converged ? kExitOk : kExitPartial;
}

int cmd_learn(const Common& c, const std::string& mode, const std::string& manifest) {
  const ExperimentConfig cfg = config_of(c);
  StudySpec spec;
  spec.mode = parse_study_mode(mode);
  spec.seed = c.seed.value_or(0);
  spec.demos_per_cell = cfg.demos_per_cell;
  const auto demos = load_manifest_demos(read_manifest(manifest));
  const StudyResult r = run_study(spec, demos, cfg.irl);
  const fs::path out(c.out);
  write_text(out / "study.json", study_to_json(r).dump(2) + "\n");
  write_text(out / "report.json", report_to_json(r.report).dump(2) + "\n");
  write_text(out / "report.txt", format_report(r.report));
  for (const auto& cell : r.cells) {
    if (cell.result) write_window_matrix_csv((out / ("weights_" + cell.name + ".csv")).string(), cell.result->weights.w);
    if (cell.failed) std::cerr << "cell " << cell.name << " failed: " << cell.error << "\n";
  }
  std::cout << format_report(r.report);
  if (r.report.failed_cells == static_cast<int>(r.cells.size())) return kExitFatal;
  return r.report.failed_cells > 0 ? kExitPartial : kExitOk;
}

int cmd_eval(const Common& c, const std::string& manifest, const std::string& weights_path) {
  const ExperimentConfig cfg = config_of(c);
  const auto demos = load_manifest_demos(read_manifest(manifest));
  const WeightSchedule w(read_window_matrix_csv(weights_path));
  const EvalReport r = evaluate_weights(w, demos, cfg.irl.solver, "eval");
  write_text(fs::path(c.out) / "report.json", report_to_json(r).dump(2) + "\n");
  write_text(fs::path(c.out) / "report.txt", format_report(r));
  std::cout << format_report(r);
  return kExitOk;
}

int cmd_plots(const Common& c, const std::string& study_path) {
  std::ifstream in(study_path);
  if (!in) throw Error(ErrorKind::kInvalidArgument, "cannot open " + study_path);
  const StudyResult s = study_from_json(nlohmann::json::parse(in));
  for (const auto& p : emit_plots(s, c.out)) std::cout << "wrote " << p << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reachirl: time-varying cost weights for planar reaching"};
  app.require_subcommand(1);
  Common common;

  auto* synth = app.add_subcommand("synth", "generate synthetic demonstrations and a manifest");
  add_common(synth, common);

  std::string input, subject = "S01", posture = "P1";
  auto* pre = app.add_subcommand("preprocess", "marker CSV to a demonstration");
  add_common(pre, common);
  pre->add_option("--input", input, "marker CSV (t,sx,sy,sz,ex,ey,ez,wx,wy,wz)")->required();
  pre->add_option("--subject", subject, "subject id");
  pre->add_option("--posture", posture, "initial posture P1..P5");

  std::string demo_path;
  int windows = 0;
  auto* feat = app.add_subcommand("features", "per-window feature matrix of a demonstration");
  add_common(feat, common);
  feat->add_option("--demo", demo_path, "demonstration CSV")->required();
  feat->add_option("--windows", windows, "window count (default floor(T/2))");

  std::string weights_path;
  int horizon = 0;
  double dt = 0.0;
  auto* sim = app.add_subcommand("simulate", "solve the reaching problem at given weights");
  add_common(sim, common);
  sim->add_option("--weights", weights_path, "weight matrix CSV")->required();
  sim->add_option("--posture", posture, "initial posture P1..P5");
  sim->add_option("--horizon", horizon, "number of control steps");
  sim->add_option("--dt", dt, "time step [s]");

  std::string mode, manifest;
  auto* learn = app.add_subcommand("learn", "learn weights for a study design");
  add_common(learn, common);
  learn->add_option("--mode", mode, "sdpd, sdpi or sipi")->required()->check(CLI::IsMember({"sdpd", "sdpi", "sipi"}, CLI::ignore_case));
  learn->add_option("--manifest", manifest, "demonstration manifest JSON")->required();

  auto* eval = app.add_subcommand("eval", "score demonstrations with fixed weights");
  add_common(eval, common);
  eval->add_option("--manifest", manifest, "demonstration manifest JSON")->required();
  eval->add_option("--weights", weights_path, "weight matrix CSV")->required();

  std::string study_path;
  auto* plots = app.add_subcommand("plots", "plot data from a learning run");
  add_common(plots, common);
  plots->add_option("--study", study_path, "study.json written by learn")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitFatal;
  }

  try {
    if (*synth) return cmd_synth(common);
    if (*pre) return cmd_preprocess(common, input, subject, posture);
    if (*feat) return cmd_features(common, demo_path, windows);
    if (*sim) return cmd_simulate(common, weights_path, posture, horizon, dt);
    if (*learn) return cmd_learn(common, mode, manifest);
    if (*eval) return cmd_eval(common, manifest, weights_path);
    if (*plots) return cmd_plots(common, study_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitFatal;
}
