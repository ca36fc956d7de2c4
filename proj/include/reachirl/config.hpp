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

#include <fstream>
#include <map>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "reachirl/arm.hpp"
#include "reachirl/demo_io.hpp"
#include "reachirl/demonstration.hpp"
#include "reachirl/error.hpp"
#include "reachirl/moirl.hpp"
#include "reachirl/study.hpp"

namespace reachirl {

/// Everything the command-line drivers read from a config file. Missing keys
/// keep their defaults; the solver block is shared by all solves.
struct ExperimentConfig {
  ArmModel arm;
  std::map<Posture, Eigen::Vector2d> postures;  // radians
  IrlConfig irl;
  DatasetSpec dataset;
  ProfileSpec profile;
  PreprocessOptions preprocess;
  int demos_per_cell = 0;

  ExperimentConfig() {
    for (Posture p : kAllPostures) postures[p] = default_posture_angles(p);
  }

  Eigen::Vector2d posture_angles(Posture p) const { return postures.at(p); }
};

inline void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  c = ExperimentConfig();
  if (j.contains("arm")) c.arm = j.at("arm").get<ArmModel>();
  if (j.contains("postures_deg")) {
    for (const auto& [name, v] : j.at("postures_deg").items()) {
      if (!v.is_array() || v.size() != 2) {
        throw Error(ErrorKind::kInvalidArgument, "postures_deg." + name + " must be [q1, q2]");
      }
      c.postures[parse_posture(name)] = {v[0].get<double>() * kDegToRad, v[1].get<double>() * kDegToRad};
    }
  }
  if (j.contains("irl")) c.irl = j.at("irl").get<IrlConfig>();
  if (j.contains("solver")) c.irl.solver = j.at("solver").get<SolverOptions>();
  if (j.contains("synth")) {
    const auto& s = j.at("synth");
    const DatasetSpec d;
    c.dataset.subjects = s.value("subjects", d.subjects);
    c.dataset.trials = s.value("trials", d.trials);
    c.dataset.horizon = s.value("horizon", d.horizon);
    c.dataset.dt = s.value("dt", d.dt);
    c.dataset.noise_std = s.value("noise_std_deg", 0.0) * kDegToRad;
    c.dataset.q0_jitter = s.value("q0_jitter_deg", 0.0) * kDegToRad;
    if (s.contains("postures")) {
      c.dataset.postures.clear();
      for (const auto& p : s.at("postures")) c.dataset.postures.push_back(parse_posture(p.get<std::string>()));
    }
    if (s.contains("profile")) c.profile = s.at("profile").get<ProfileSpec>();
  }
  if (j.contains("preprocess")) c.preprocess = j.at("preprocess").get<PreprocessOptions>();
  if (j.contains("study")) c.demos_per_cell = j.at("study").value("demos_per_cell", 0);
}

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  nlohmann::json postures;
  for (const auto& [p, q] : c.postures) postures[to_string(p)] = {q[0] * kRadToDeg, q[1] * kRadToDeg};
  nlohmann::json synth{{"subjects", c.dataset.subjects},
                       {"trials", c.dataset.trials},
                       {"horizon", c.dataset.horizon},
                       {"dt", c.dataset.dt},
                       {"noise_std_deg", c.dataset.noise_std * kRadToDeg},
                       {"q0_jitter_deg", c.dataset.q0_jitter * kRadToDeg},
                       {"postures", nlohmann::json::array()},
                       {"profile", c.profile}};
  for (Posture p : c.dataset.postures) synth["postures"].push_back(to_string(p));
  nlohmann::json irl = c.irl;
  irl.erase("solver");
  j = nlohmann::json{{"arm", c.arm},
                     {"postures_deg", postures},
                     {"solver", c.irl.solver},
                     {"irl", irl},
                     {"synth", synth},
                     {"preprocess", c.preprocess},
                     {"study", {{"demos_per_cell", c.demos_per_cell}}}};
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kInvalidArgument, "cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kParseError, path + ": " + e.what());
  }
  return j.get<ExperimentConfig>();
}

}  // namespace reachirl
