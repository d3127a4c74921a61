// Copyright 2026 The Handover VMC Authors
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

// Hand-pose conditioning: first-order low-pass on the palm pose and a
// constant-velocity Kalman filter for the palm velocity.

#ifndef HVMC_HAND_SIGNAL_HPP_
#define HVMC_HAND_SIGNAL_HPP_

#include <string>
#include <utility>

#include <Eigen/Core>
#include <json.hpp>

#include "hvmc/kinematics.hpp"

namespace hvmc {

struct FilterParams {
  double cutoff_hz = 8.0;
  double q_proc = 5.0;            // (m/s^2)^2 white-acceleration intensity
  double r_meas = 0.005 * 0.005;  // m^2 position measurement variance
  double initial_velocity_var = 1.0;

  void validate() const;
};

FilterParams filter_params_from_json(const nlohmann::json& j,
                                     const FilterParams& base,
                                     const std::string& path);
nlohmann::json to_json(const FilterParams& p);

struct LowPassState {
  double cutoff = 8.0;  // Hz
  Pose last_output;
};

// Smoothing coefficient a = dt / (dt + 1 / (2 pi cutoff)).
double lowpass_coefficient(double cutoff, double dt);

// Position: exponential smoothing by a. Orientation: slerp from the last
// output toward the raw reading by a, renormalised.
std::pair<LowPassState, Pose> lowpass_update(const LowPassState& s,
                                             const Pose& raw, double dt);

struct KalmanCvState {
  Eigen::Matrix<double, 6, 1> x = Eigen::Matrix<double, 6, 1>::Zero();
  Eigen::Matrix<double, 6, 6> P = Eigen::Matrix<double, 6, 6>::Identity();
  double q_proc = 5.0;
  double r_meas = 0.005 * 0.005;

  // Position initialised to `z`, zero velocity.
  static KalmanCvState Initial(const Vec3& z, const FilterParams& params);
};

// Constant-velocity predict + position update. Returns the velocity block.
// Throws Error(kDiverged) if P loses positive semidefiniteness beyond 1e-9
// or the innovation covariance is not positive definite.
std::pair<KalmanCvState, Vec3> kalman_update(const KalmanCvState& s,
                                             const Vec3& z, double dt);

}  // namespace hvmc

#endif  // HVMC_HAND_SIGNAL_HPP_
