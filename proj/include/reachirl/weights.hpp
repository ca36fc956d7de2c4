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

#include <string>

#include <Eigen/Core>

#include "reachirl/error.hpp"
#include "reachirl/features.hpp"

namespace reachirl {

/// Nonnegative per-window feature weights, one row of seven per window.
struct WeightSchedule {
  Eigen::MatrixXd w;  // n_windows x 7

  WeightSchedule() = default;
  explicit WeightSchedule(Eigen::MatrixXd m) : w(std::move(m)) { validate(); }

  static WeightSchedule uniform(int n_windows) {
    return WeightSchedule(Eigen::MatrixXd::Constant(n_windows, kNumFeatures,
                                                    1.0 / (kNumFeatures * n_windows)));
  }

  int n_windows() const { return static_cast<int>(w.rows()); }

  void validate() const {
    if (w.cols() != kNumFeatures || w.rows() < 1) {
      throw Error(ErrorKind::kShapeMismatch, "weight schedule must be N_w x 7");
    }
    if (!w.allFinite() || (w.array() < 0.0).any()) {
      throw Error(ErrorKind::kInvalidArgument, "weights must be finite and >= 0");
    }
  }
};

/// sum_s w_s . Phi_s
inline double total_cost(const WindowedFeatures& features, const WeightSchedule& weights) {
  if (features.phi.rows() != weights.w.rows() || features.phi.cols() != weights.w.cols()) {
    throw Error(ErrorKind::kShapeMismatch,
                "features are " + std::to_string(features.phi.rows()) + "x" +
                    std::to_string(features.phi.cols()) + ", weights are " +
                    std::to_string(weights.w.rows()) + "x" + std::to_string(weights.w.cols()));
  }
  return (features.phi.array() * weights.w.array()).sum();
}

}  // namespace reachirl
