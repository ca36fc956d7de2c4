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
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "reachirl/demo_io.hpp"
#include "reachirl/demonstration.hpp"
#include "reachirl/doc_solver.hpp"
#include "reachirl/error.hpp"
#include "reachirl/features.hpp"
#include "reachirl/moirl.hpp"
#include "reachirl/weights.hpp"

namespace reachirl {

// ---------------------------------------------------------------------------
// RMSE

struct JointRmse {
  double q1 = 0.0;  // degrees
  double q2 = 0.0;
  double avg() const { return 0.5 * (q1 + q2); }
};

/// Per-joint RMSE in degrees over all samples of two equally long trajectories.
inline JointRmse rmse(const Trajectory& pred, const Trajectory& demo) {
  if (pred.states.size() != demo.states.size() || pred.states.empty()) {
    throw Error(ErrorKind::kLengthMismatch, "rmse needs equally long, non-empty trajectories (" +
                                                std::to_string(pred.states.size()) + " vs " +
                                                std::to_string(demo.states.size()) + " samples)");
  }
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t t = 0; t < pred.states.size(); ++t) {
    const Eigen::Vector2d d = pred.states[t].q - demo.states[t].q;
    s1 += d[0] * d[0];
    s2 += d[1] * d[1];
  }
  const double n = static_cast<double>(pred.states.size());
  return {std::sqrt(s1 / n) * kRadToDeg, std::sqrt(s2 / n) * kRadToDeg};
}

// ---------------------------------------------------------------------------
// Reference tables

struct ReferenceRow {
  const char* label;
  double q1, q2, avg;
};

struct ReferenceTable {
  const char* name;
  std::array<ReferenceRow, 6> rows;  // P1..P5, All
};

/// Fixed-weight baseline of the original study on the human data [deg].
inline const ReferenceTable& baseline_reference() {
  static const ReferenceTable t{"baseline",
                                {{{"P1", 16.92, 15.40, 16.16},
                                  {"P2", 10.06, 13.84, 11.95},
                                  {"P3", 20.60, 19.83, 20.21},
                                  {"P4", 9.28, 19.84, 14.56},
                                  {"P5", 13.54, 17.35, 15.45},
                                  {"All", 13.89, 16.99, 15.44}}}};
  return t;
}

inline constexpr double kBaselineOverallMean = 15.44;
inline constexpr double kBaselineOverallSd = 10.57;

/// Published time-varying results on the human data, per study mode [deg].
/// The "All" rows of the SDPI and SIPI tables are stored as printed; they
/// repeat the P5 row of the SDPD table.
inline const std::array<ReferenceTable, 3>& published_reference() {
  static const std::array<ReferenceTable, 3> t{{
      {"SDPD",
       {{{"P1", 8.56, 8.47, 8.51},
         {"P2", 7.77, 7.17, 7.47},
         {"P3", 14.46, 9.76, 12.11},
         {"P4", 5.52, 13.33, 9.43},
         {"P5", 11.99, 10.36, 11.17},
         {"All", 9.50, 9.68, 9.59}}}},
      {"SDPI",
       {{{"P1", 8.39, 9.80, 9.10},
         {"P2", 12.40, 9.94, 11.17},
         {"P3", 19.71, 15.17, 17.44},
         {"P4", 8.75, 13.76, 11.26},
         {"P5", 12.32, 14.83, 13.57},
         {"All", 11.99, 10.36, 11.17}}}},
      {"SIPI",
       {{{"P1", 6.98, 8.69, 7.83},
         {"P2", 13.09, 9.26, 11.17},
         {"P3", 20.85, 15.23, 18.04},
         {"P4", 7.37, 14.36, 10.86},
         {"P5", 13.55, 16.00, 14.77},
         {"All", 11.99, 10.36, 11.17}}}},
  }};
  return t;
}

inline constexpr double kPublishedSdpdMean = 9.59;
inline constexpr double kPublishedSdpdSd = 5.20;

// ---------------------------------------------------------------------------
// Study specification

enum class StudyMode { kSDPD, kSDPI, kSIPI };

inline std::string to_string(StudyMode m) {
  switch (m) {
    case StudyMode::kSDPD: return "sdpd";
    case StudyMode::kSDPI: return "sdpi";
    case StudyMode::kSIPI: return "sipi";
  }
  return "unknown";
}

inline StudyMode parse_study_mode(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "sdpd") return StudyMode::kSDPD;
  if (s == "sdpi") return StudyMode::kSDPI;
  if (s == "sipi") return StudyMode::kSIPI;
  throw Error(ErrorKind::kInvalidArgument, "mode must be sdpd, sdpi or sipi, got '" + s + "'");
}

struct ManifestEntry {
  std::string subject;
  Posture posture = Posture::P1;
  std::string path;  // relative to the manifest directory unless absolute
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::string base_dir;
};

inline void write_manifest(const std::string& path, const Manifest& m) {
  nlohmann::json j{{"schema_version", kDemoSchemaVersion}, {"demos", nlohmann::json::array()}};
  for (const auto& e : m.entries) {
    j["demos"].push_back({{"subject", e.subject}, {"posture", to_string(e.posture)}, {"path", e.path}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kInvalidArgument, "cannot write " + path);
  out << j.dump(2) << "\n";
}

inline Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kParseError, "cannot open " + path);
  Manifest m;
  m.base_dir = std::filesystem::path(path).parent_path().string();
  try {
    const auto j = nlohmann::json::parse(in);
    const int version = j.at("schema_version").get<int>();
    if (version != kDemoSchemaVersion) {
      throw Error(ErrorKind::kSchemaVersionMismatch,
                  path + ": schema_version " + std::to_string(version) + ", expected " +
                      std::to_string(kDemoSchemaVersion));
    }
    for (const auto& e : j.at("demos")) {
      m.entries.push_back({e.at("subject").get<std::string>(),
                           parse_posture(e.at("posture").get<std::string>()),
                           e.at("path").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParseError, path + ": " + e.what());
  }
  return m;
}

inline std::vector<Demonstration> load_manifest_demos(const Manifest& m) {
  std::vector<Demonstration> demos;
  for (const auto& e : m.entries) {
    std::filesystem::path p(e.path);
    if (p.is_relative() && !m.base_dir.empty()) p = std::filesystem::path(m.base_dir) / p;
    Demonstration d = read_demo(p.string());
    if (d.subject_id != e.subject || d.posture != e.posture) {
      throw Error(ErrorKind::kInvalidArgument,
                  p.string() + ": sidecar metadata disagrees with the manifest entry");
    }
    demos.push_back(std::move(d));
  }
  return demos;
}

struct StudySpec {
  StudyMode mode = StudyMode::kSIPI;
  std::uint64_t seed = 0;
  // Input demonstrations per sampling unit: per (subject, posture) cell for
  // SDPD, per posture within a subject for SDPI and SIPI. 0 selects 3 for
  // SDPD and 1 otherwise.
  int demos_per_cell = 0;

  int per_cell() const {
    if (demos_per_cell > 0) return demos_per_cell;
    return mode == StudyMode::kSDPD ? 3 : 1;
  }
};

// ---------------------------------------------------------------------------
// Results

enum class DemoUse { kInput, kHeldOut };

inline const char* to_string(DemoUse u) { return u == DemoUse::kInput ? "input" : "held_out"; }

struct RmseEntry {
  std::string cell;
  std::string subject;
  Posture posture = Posture::P1;
  int demo = 0;  // index into the study's demonstration list
  DemoUse use = DemoUse::kInput;
  JointRmse rmse;
};

struct CellResult {
  std::string name;
  std::string subject;                // empty for SIPI
  std::optional<Posture> posture;     // SDPD only
  std::vector<int> inputs;            // demo indices used for learning
  std::vector<int> scope;             // demo indices scored with this cell's weights
  bool failed = false;
  std::string error;
  std::optional<IrlResult> result;
  Eigen::MatrixXd mean_features;      // mean window features of the learned trajectories
};

struct PostureSummary {
  std::string label;  // P1..P5 or All
  int n = 0;
  JointRmse mean;
  double sd_avg = 0.0;  // sample SD of per-demo Avg values
};

struct EvalReport {
  std::string mode;
  std::uint64_t seed = 0;
  std::vector<RmseEntry> entries;
  std::map<std::string, std::vector<PostureSummary>> views;  // held_out, input, all
  int failed_cells = 0;
};

struct StudyResult {
  StudySpec spec;
  std::vector<CellResult> cells;
  EvalReport report;
};

// ---------------------------------------------------------------------------
// Sampling and cells

namespace detail {

// Partial Fisher-Yates using the raw engine output, so the draw is identical
// across standard library implementations.
inline std::vector<int> sample_without_replacement(std::vector<int> pool, int k, std::mt19937_64& rng) {
  const int n = static_cast<int>(pool.size());
  k = std::min(k, n);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

inline std::vector<Posture> postures_present(const std::vector<Demonstration>& demos) {
  std::set<int> s;
  for (const auto& d : demos) s.insert(static_cast<int>(d.posture));
  std::vector<Posture> out;
  for (int p : s) out.push_back(static_cast<Posture>(p));
  return out;
}

inline std::vector<std::string> subjects_present(const std::vector<Demonstration>& demos) {
  std::set<std::string> s;
  for (const auto& d : demos) s.insert(d.subject_id);
  return {s.begin(), s.end()};
}

inline std::vector<int> indices_of(const std::vector<Demonstration>& demos, const std::string& subject,
                                   std::optional<Posture> posture) {
  std::vector<int> out;
  for (std::size_t i = 0; i < demos.size(); ++i) {
    if (!subject.empty() && demos[i].subject_id != subject) continue;
    if (posture && demos[i].posture != *posture) continue;
    out.push_back(static_cast<int>(i));
  }
  return out;
}

}  // namespace detail

/// Cells of the study with their sampled inputs. Every subject must have at
/// least `per_cell` demonstrations for every posture present in the data.
inline std::vector<CellResult> plan_cells(const StudySpec& spec, const std::vector<Demonstration>& demos) {
  if (demos.empty()) throw Error(ErrorKind::kManifestIncomplete, "no demonstrations");
  const auto postures = detail::postures_present(demos);
  const auto subjects = detail::subjects_present(demos);
  const int k = spec.per_cell();
  for (const auto& s : subjects) {
    for (Posture p : postures) {
      const auto idx = detail::indices_of(demos, s, p);
      if (static_cast<int>(idx.size()) < k) {
        throw Error(ErrorKind::kManifestIncomplete,
                    "subject " + s + " has " + std::to_string(idx.size()) + " demonstrations for " +
                        to_string(p) + ", mode " + to_string(spec.mode) + " needs " + std::to_string(k));
      }
    }
  }
  std::mt19937_64 rng(spec.seed);
  std::vector<CellResult> cells;
  auto sample_subject = [&](const std::string& s, CellResult& c) {
    for (Posture p : postures) {
      const auto picked = detail::sample_without_replacement(detail::indices_of(demos, s, p), k, rng);
      c.inputs.insert(c.inputs.end(), picked.begin(), picked.end());
    }
  };
  switch (spec.mode) {
    case StudyMode::kSDPD:
      for (const auto& s : subjects) {
        for (Posture p : postures) {
          CellResult c;
          c.name = s + "_" + to_string(p);
          c.subject = s;
          c.posture = p;
          c.scope = detail::indices_of(demos, s, p);
          c.inputs = detail::sample_without_replacement(c.scope, k, rng);
          cells.push_back(std::move(c));
        }
      }
      break;
    case StudyMode::kSDPI:
      for (const auto& s : subjects) {
        CellResult c;
        c.name = s;
        c.subject = s;
        c.scope = detail::indices_of(demos, s, std::nullopt);
        sample_subject(s, c);
        cells.push_back(std::move(c));
      }
      break;
    case StudyMode::kSIPI: {
      CellResult c;
      c.name = "all";
      for (const auto& s : subjects) sample_subject(s, c);
      c.scope = detail::indices_of(demos, "", std::nullopt);
      cells.push_back(std::move(c));
      break;
    }
  }
  for (auto& c : cells) std::sort(c.inputs.begin(), c.inputs.end());
  return cells;
}

/// DOC prediction of one demonstration at the given weights: same start
/// posture, target, horizon and sampling interval.
inline DocSolution predict_demo(const Demonstration& d, const WeightSchedule& w, const SolverOptions& opts,
                                const std::optional<Trajectory>& warm = std::nullopt) {
  DocProblem p;
  p.model = d.arm;
  p.q0 = d.q0();
  p.target_x = d.target_x;
  p.horizon = d.horizon();
  p.dt = d.traj.dt;
  p.plan = make_window_plan(d.horizon(), w.n_windows());
  p.weights = w;
  return solve(p, warm, opts);
}

namespace detail {

inline std::vector<PostureSummary> summarize(const std::vector<RmseEntry>& entries,
                                             std::optional<DemoUse> use) {
  std::map<std::string, std::vector<const RmseEntry*>> by;
  for (const auto& e : entries) {
    if (use && e.use != *use) continue;
    by[to_string(e.posture)].push_back(&e);
    by["All"].push_back(&e);
  }
  std::vector<PostureSummary> out;
  for (const char* label : {"P1", "P2", "P3", "P4", "P5", "All"}) {
    auto it = by.find(label);
    if (it == by.end()) continue;
    PostureSummary s;
    s.label = label;
    s.n = static_cast<int>(it->second.size());
    for (const auto* e : it->second) {
      s.mean.q1 += e->rmse.q1;
      s.mean.q2 += e->rmse.q2;
    }
    s.mean.q1 /= s.n;
    s.mean.q2 /= s.n;
    if (s.n > 1) {
      double ss = 0.0;
      for (const auto* e : it->second) ss += std::pow(e->rmse.avg() - s.mean.avg(), 2);
      s.sd_avg = std::sqrt(ss / (s.n - 1));
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace detail

inline void finalize_report(EvalReport& r) {
  r.views.clear();
  r.views["held_out"] = detail::summarize(r.entries, DemoUse::kHeldOut);
  r.views["input"] = detail::summarize(r.entries, DemoUse::kInput);
  r.views["all"] = detail::summarize(r.entries, std::nullopt);
}

/// Warm starts for scoring: the learner's final trajectory of each task,
/// keyed by (subject, posture, horizon, dt).
using WarmStarts = std::map<std::tuple<std::string, int, int, double>, Trajectory>;

inline WarmStarts warm_starts_of(const IrlResult& r) {
  WarmStarts m;
  for (std::size_t g = 0; g < r.groups.size() && g < r.final_trajectories.size(); ++g) {
    const auto& t = r.groups[g];
    m[{t.subject_id, static_cast<int>(t.posture), t.horizon, t.dt}] = r.final_trajectories[g].traj;
  }
  return m;
}

/// Scores every demonstration in the cell's scope with the cell's weights.
inline std::vector<RmseEntry> score_cell(const CellResult& c, const WeightSchedule& w,
                                         const std::vector<Demonstration>& demos,
                                         const SolverOptions& opts, const WarmStarts& warm = {}) {
  std::vector<RmseEntry> out;
  // Demonstrations with identical start and task share one prediction.
  std::map<std::tuple<std::string, double, double, double, int, double>, Trajectory> cache;
  for (int i : c.scope) {
    const auto& d = demos[i];
    const auto key = std::make_tuple(d.subject_id, d.q0()[0], d.q0()[1], d.target_x, d.horizon(), d.traj.dt);
    auto it = cache.find(key);
    if (it == cache.end()) {
      std::optional<Trajectory> ws;
      const auto wit = warm.find({d.subject_id, static_cast<int>(d.posture), d.horizon(), d.traj.dt});
      if (wit != warm.end()) ws = wit->second;
      it = cache.emplace(key, predict_demo(d, w, opts, ws).traj).first;
    }
    const bool input = std::binary_search(c.inputs.begin(), c.inputs.end(), i);
    out.push_back({c.name, d.subject_id, d.posture, i, input ? DemoUse::kInput : DemoUse::kHeldOut,
                   rmse(it->second, d.traj)});
  }
  return out;
}

/// Runs the learner once per cell and scores input and held-out demonstrations.
/// A failing cell is recorded and the remaining cells still run.
inline StudyResult run_study(const StudySpec& spec, const std::vector<Demonstration>& demos,
                             const IrlConfig& cfg) {
  StudyResult out;
  out.spec = spec;
  out.cells = plan_cells(spec, demos);
  out.report.mode = to_string(spec.mode);
  out.report.seed = spec.seed;
  for (auto& c : out.cells) {
    try {
      std::vector<Demonstration> inputs;
      for (int i : c.inputs) inputs.push_back(demos[i]);
      IrlResult r = run(inputs, cfg);
      Eigen::MatrixXd mf = Eigen::MatrixXd::Zero(r.weights.n_windows(), kNumFeatures);
      const FeatureOptions fopts = exact_feature_options(cfg.solver);
      for (std::size_t g = 0; g < r.groups.size(); ++g) {
        mf += windowed_features(r.groups[g].arm, r.final_trajectories[g].traj, r.groups[g].plan, fopts).phi;
      }
      c.mean_features = mf / static_cast<double>(std::max<std::size_t>(1, r.groups.size()));
      auto scored = score_cell(c, r.weights, demos, cfg.solver, warm_starts_of(r));
      out.report.entries.insert(out.report.entries.end(), scored.begin(), scored.end());
      c.result = std::move(r);
    } catch (const std::exception& e) {
      c.failed = true;
      c.error = e.what();
      ++out.report.failed_cells;
    }
  }
  finalize_report(out.report);
  return out;
}

/// Scores all demonstrations with one fixed weight schedule.
inline EvalReport evaluate_weights(const WeightSchedule& w, const std::vector<Demonstration>& demos,
                                   const SolverOptions& opts, const std::string& label = "fixed") {
  CellResult c;
  c.name = label;
  for (std::size_t i = 0; i < demos.size(); ++i) c.scope.push_back(static_cast<int>(i));
  EvalReport r;
  r.mode = label;
  r.entries = score_cell(c, w, demos, opts);
  for (auto& e : r.entries) e.use = DemoUse::kHeldOut;
  finalize_report(r);
  return r;
}

// ---------------------------------------------------------------------------
// Serialization and text output

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (j.empty()) return {};
  Eigen::MatrixXd m(static_cast<int>(j.size()), static_cast<int>(j.at(0).size()));
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

inline nlohmann::json reference_to_json(const ReferenceTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) rows.push_back({{"posture", r.label}, {"q1", r.q1}, {"q2", r.q2}, {"avg", r.avg}});
  return {{"name", t.name}, {"rows", rows}};
}

inline nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json j{{"mode", r.mode}, {"seed", r.seed}, {"failed_cells", r.failed_cells}};
  j["entries"] = nlohmann::json::array();
  for (const auto& e : r.entries) {
    j["entries"].push_back({{"cell", e.cell},
                            {"subject", e.subject},
                            {"posture", to_string(e.posture)},
                            {"demo", e.demo},
                            {"use", to_string(e.use)},
                            {"q1", e.rmse.q1},
                            {"q2", e.rmse.q2},
                            {"avg", e.rmse.avg()}});
  }
  for (const auto& [view, rows] : r.views) {
    nlohmann::json v = nlohmann::json::array();
    for (const auto& s : rows) {
      v.push_back({{"posture", s.label},
                   {"n", s.n},
                   {"q1", s.mean.q1},
                   {"q2", s.mean.q2},
                   {"avg", s.mean.avg()},
                   {"sd_avg", s.sd_avg}});
    }
    j["views"][view] = v;
  }
  j["baseline"] = reference_to_json(baseline_reference());
  j["baseline"]["overall_mean"] = kBaselineOverallMean;
  j["baseline"]["overall_sd"] = kBaselineOverallSd;
  j["published"] = nlohmann::json::array();
  for (const auto& t : published_reference()) j["published"].push_back(reference_to_json(t));
  return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.mode = j.at("mode").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.failed_cells = j.at("failed_cells").get<int>();
  for (const auto& e : j.at("entries")) {
    r.entries.push_back({e.at("cell").get<std::string>(), e.at("subject").get<std::string>(),
                         parse_posture(e.at("posture").get<std::string>()), e.at("demo").get<int>(),
                         e.at("use").get<std::string>() == "input" ? DemoUse::kInput : DemoUse::kHeldOut,
                         {e.at("q1").get<double>(), e.at("q2").get<double>()}});
  }
  finalize_report(r);
  return r;
}

inline std::string fixed2(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

/// Text table of learned RMSE beside the stored baseline, one block per view.
inline std::string format_report(const EvalReport& r) {
  std::string s = "mode " + r.mode + ", seed " + std::to_string(r.seed) + ", failed cells " +
                  std::to_string(r.failed_cells) + "\n";
  const auto& base = baseline_reference();
  for (const char* view : {"held_out", "input", "all"}) {
    auto it = r.views.find(view);
    if (it == r.views.end() || it->second.empty()) continue;
    s += std::string("\n[") + view + "]\nposture  n     q1     q2    avg   |  baseline q1     q2    avg\n";
    for (const auto& row : it->second) {
      const ReferenceRow* b = nullptr;
      for (const auto& br : base.rows) {
        if (row.label == br.label) b = &br;
      }
      char line[160];
      std::snprintf(line, sizeof(line), "%-7s %3d %6s %6s %6s   |  %11s %6s %6s\n", row.label.c_str(), row.n,
                    fixed2(row.mean.q1).c_str(), fixed2(row.mean.q2).c_str(), fixed2(row.mean.avg()).c_str(),
                    b ? fixed2(b->q1).c_str() : "-", b ? fixed2(b->q2).c_str() : "-",
                    b ? fixed2(b->avg).c_str() : "-");
      s += line;
    }
  }
  s += "\nbaseline overall " + fixed2(kBaselineOverallMean) + " +- " + fixed2(kBaselineOverallSd) + " deg\n";
  return s;
}

inline nlohmann::json cell_to_json(const CellResult& c) {
  nlohmann::json j{{"name", c.name}, {"subject", c.subject}, {"inputs", c.inputs}, {"scope", c.scope},
                   {"failed", c.failed}, {"error", c.error}};
  j["posture"] = c.posture ? nlohmann::json(to_string(*c.posture)) : nlohmann::json(nullptr);
  if (c.result) {
    const auto& r = *c.result;
    j["weights"] = matrix_to_json(r.weights.w);
    j["mean_features"] = matrix_to_json(c.mean_features);
    j["merit_history"] = r.merit_history;
    j["accepted_steps"] = r.accepted_steps;
    j["terminated_reason"] = to_string(r.terminated_reason);
    j["observed_set_size"] = r.observed_set_size;
  }
  return j;
}

inline nlohmann::json study_to_json(const StudyResult& s) {
  nlohmann::json j{{"mode", to_string(s.spec.mode)}, {"seed", s.spec.seed}, {"demos_per_cell", s.spec.per_cell()}};
  j["cells"] = nlohmann::json::array();
  for (const auto& c : s.cells) j["cells"].push_back(cell_to_json(c));
  j["report"] = report_to_json(s.report);
  return j;
}

// ---------------------------------------------------------------------------
// Plot data

/// Weights times features, each window normalized to sum to 1. Windows with a
/// zero total stay zero.
inline Eigen::MatrixXd cost_contributions(const Eigen::MatrixXd& w, const Eigen::MatrixXd& phi) {
  if (w.rows() != phi.rows() || w.cols() != phi.cols()) {
    throw Error(ErrorKind::kShapeMismatch, "weights and features differ in shape");
  }
  Eigen::MatrixXd c = w.cwiseProduct(phi);
  for (int s = 0; s < c.rows(); ++s) {
    const double total = c.row(s).sum();
    if (total > 0.0) c.row(s) /= total;
  }
  return c;
}

/// Percentile with linear interpolation between closest ranks, p in [0, 100].
inline double percentile(std::vector<double> x, double p) {
  if (x.empty()) throw Error(ErrorKind::kInvalidArgument, "percentile of an empty list");
  std::sort(x.begin(), x.end());
  const double pos = p / 100.0 * static_cast<double>(x.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

struct BoxStats {
  int n = 0;
  double min = 0, q25 = 0, median = 0, q75 = 0, max = 0, mean = 0;
};

inline BoxStats box_stats(const std::vector<double>& x) {
  BoxStats b;
  b.n = static_cast<int>(x.size());
  if (x.empty()) return b;
  b.min = *std::min_element(x.begin(), x.end());
  b.max = *std::max_element(x.begin(), x.end());
  b.q25 = percentile(x, 25.0);
  b.median = percentile(x, 50.0);
  b.q75 = percentile(x, 75.0);
  double sum = 0.0;
  for (double v : x) sum += v;
  b.mean = sum / static_cast<double>(x.size());
  return b;
}

inline std::string boxplot_csv(const EvalReport& r) {
  std::string s = "use,group,joint,n,min,q25,median,q75,max,mean\n";
  for (const char* use : {"held_out", "input", "all"}) {
    for (const char* group : {"P1", "P2", "P3", "P4", "P5", "All"}) {
      std::vector<double> q1, q2, avg;
      for (const auto& e : r.entries) {
        if (std::string(use) != "all" && std::string(use) != to_string(e.use)) continue;
        if (std::string(group) != "All" && std::string(group) != to_string(e.posture)) continue;
        q1.push_back(e.rmse.q1);
        q2.push_back(e.rmse.q2);
        avg.push_back(e.rmse.avg());
      }
      if (avg.empty()) continue;
      for (const auto& [joint, xs] : {std::pair{"q1", &q1}, std::pair{"q2", &q2}, std::pair{"avg", &avg}}) {
        const BoxStats b = box_stats(*xs);
        s += std::string(use) + "," + group + "," + joint + "," + std::to_string(b.n) + "," +
             csv::format(b.min) + "," + csv::format(b.q25) + "," + csv::format(b.median) + "," +
             csv::format(b.q75) + "," + csv::format(b.max) + "," + csv::format(b.mean) + "\n";
      }
    }
  }
  return s;
}

/// Writes weights_<cell>.csv, contributions_<cell>.csv, rmse_boxplot.csv and
/// baseline.csv into `dir`. Returns the written paths.
inline std::vector<std::string> emit_plots(const StudyResult& s, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  auto write = [&](const std::string& name, const std::string& text) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::kInvalidArgument, "cannot write " + path);
    out << text;
    written.push_back(path);
  };
  for (const auto& c : s.cells) {
    if (!c.result) continue;
    write("weights_" + c.name + ".csv", window_matrix_csv(c.result->weights.w));
    write("contributions_" + c.name + ".csv", window_matrix_csv(cost_contributions(c.result->weights.w, c.mean_features)));
  }
  write("rmse_boxplot.csv", boxplot_csv(s.report));
  std::string base = "posture,q1,q2,avg\n";
  for (const auto& r : baseline_reference().rows) {
    base += std::string(r.label) + "," + fixed2(r.q1) + "," + fixed2(r.q2) + "," + fixed2(r.avg) + "\n";
  }
  write("baseline.csv", base);
  return written;
}

/// Rebuilds the parts of a study result that plot emission needs.
inline StudyResult study_from_json(const nlohmann::json& j) {
  StudyResult s;
  s.spec.mode = parse_study_mode(j.at("mode").get<std::string>());
  s.spec.seed = j.at("seed").get<std::uint64_t>();
  s.spec.demos_per_cell = j.at("demos_per_cell").get<int>();
  for (const auto& cj : j.at("cells")) {
    CellResult c;
    c.name = cj.at("name").get<std::string>();
    c.subject = cj.at("subject").get<std::string>();
    if (!cj.at("posture").is_null()) c.posture = parse_posture(cj.at("posture").get<std::string>());
    c.inputs = cj.at("inputs").get<std::vector<int>>();
    c.scope = cj.at("scope").get<std::vector<int>>();
    c.failed = cj.at("failed").get<bool>();
    c.error = cj.at("error").get<std::string>();
    if (cj.contains("weights")) {
      IrlResult r;
      r.weights = WeightSchedule(matrix_from_json(cj.at("weights")));
      r.merit_history = cj.at("merit_history").get<std::vector<double>>();
      r.accepted_steps = cj.at("accepted_steps").get<int>();
      c.mean_features = matrix_from_json(cj.at("mean_features"));
      c.result = std::move(r);
    }
    s.cells.push_back(std::move(c));
  }
  s.report = report_from_json(j.at("report"));
  return s;
}

}  // namespace reachirl
