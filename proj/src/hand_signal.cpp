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

#include "hvmc/hand_signal.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "hvmc/json_io.hpp"

namespace hvmc {

using Mat6 = Eigen::Matrix<double, 6, 6>;

void FilterParams::validate() const {
  auto positive = [](double v, const char* key) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "must be > 0",
                  std::string("filters.") + key);
    }
  };
  positive(cutoff_hz, "cutoff_hz");
  positive(q_proc, "q_proc");
  positive(r_meas, "r_meas");
  positive(initial_velocity_var, "initial_velocity_var");
}

FilterParams filter_params_from_json(const nlohmann::json& j,
                                     const FilterParams& base,
                                     const std::string& path) {
  FilterParams p = base;
  p.cutoff_hz = json_io::number_or(j, "cutoff_hz", p.cutoff_hz, path);
  p.q_proc = json_io::number_or(j, "q_proc", p.q_proc, path);
  p.r_meas = json_io::number_or(j, "r_meas", p.r_meas, path);
  p.initial_velocity_var = json_io::number_or(j, "initial_velocity_var",
                                              p.initial_velocity_var, path);
  p.validate();
  return p;
}

nlohmann::json to_json(const FilterParams& p) {
  return {{"cutoff_hz", p.cutoff_hz},
          {"q_proc", p.q_proc},
          {"r_meas", p.r_meas},
          {"initial_velocity_var", p.initial_velocity_var}};
}

double lowpass_coefficient(double cutoff, double dt) {
  return dt / (dt + 1.0 / (2.0 * std::numbers::pi * cutoff));
}

std::pair<LowPassState, Pose> lowpass_update(const LowPassState& s,
                                             const Pose& raw, double dt) {
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dt must be > 0",
                "lowpass_update");
  }
  if (!raw.position.allFinite() || !raw.orientation.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "non-finite raw pose",
                "lowpass_update");
  }
  const double a = lowpass_coefficient(s.cutoff, dt);
  Pose out;
  out.position = s.last_output.position + a * (raw.position -
                                               s.last_output.position);
  const Eigen::Quaterniond from(s.last_output.orientation);
  const Eigen::Quaterniond to(raw.orientation);
  out.orientation = from.slerp(a, to).normalized().toRotationMatrix();
  LowPassState next = s;
  next.last_output = out;
  return {next, out};
}

KalmanCvState KalmanCvState::Initial(const Vec3& z,
                                     const FilterParams& params) {
  KalmanCvState s;
  s.x.head<3>() = z;
  s.x.tail<3>().setZero();
  s.P.setZero();
  s.P.topLeftCorner<3, 3>().diagonal().setConstant(params.r_meas);
  s.P.bottomRightCorner<3, 3>().diagonal().setConstant(
      params.initial_velocity_var);
  s.q_proc = params.q_proc;
  s.r_meas = params.r_meas;
  return s;
}

std::pair<KalmanCvState, Vec3> kalman_update(const KalmanCvState& s,
                                             const Vec3& z, double dt) {
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dt must be > 0",
                "kalman_update");
  }
  require_finite(z, "kalman_update");
  const Mat3 I = Mat3::Identity();

  Mat6 F = Mat6::Identity();
  F.topRightCorner<3, 3>() = dt * I;
  Mat6 Q;
  Q << (dt * dt * dt / 3.0) * I, (dt * dt / 2.0) * I, (dt * dt / 2.0) * I,
      dt * I;
  Q *= s.q_proc;

  KalmanCvState next = s;
  next.x = F * s.x;
  next.P = F * s.P * F.transpose() + Q;

  // H = [I 0]
  const Mat3 S = next.P.topLeftCorner<3, 3>() + s.r_meas * I;
  const Eigen::LLT<Mat3> llt(S);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kDiverged,
                "innovation covariance not positive definite",
                "kalman_update");
  }
  // K = P H^T S^-1
  const Eigen::Matrix<double, 6, 3> PHt = next.P.leftCols<3>();
  const Eigen::Matrix<double, 6, 3> K =
      llt.solve(PHt.transpose()).transpose();
  next.x += K * (z - next.x.head<3>());

  // Joseph form keeps P symmetric positive semidefinite under rounding.
  Mat6 IKH = Mat6::Identity();
  IKH.leftCols<3>() -= K;
  next.P = IKH * next.P * IKH.transpose() +
           s.r_meas * K * K.transpose();
  next.P = 0.5 * (next.P + next.P.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Mat6> eig(next.P,
                                                Eigen::EigenvaluesOnly);
  if (!next.P.allFinite() || eig.eigenvalues().minCoeff() < -1e-9) {
    throw Error(ErrorCode::kDiverged, "covariance lost positive "
                "semidefiniteness", "kalman_update");
  }
  return {next, next.x.tail<3>()};
}

}  // namespace hvmc
