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

// Per-tick session records and their CSV / NDJSON serialisation.
//
// CSV layout: leading "# key=value" metadata lines (config_hash, dt, dof,
// end_reason), then one header row and one row per logged tick. Columns:
//   t                       s
//   q<k>, qd<k>, tau<k>     rad, rad/s, N m          (k = 0..dof-1)
//   alpha                   m
//   phase, command          TRACKING|FINAL_APPROACH|GRASPING|DONE, command
//   fingers_closed          0/1
//   grip<i>_{x,y,z}         gripper paired point i  (i = 0 left, 1 right,
//   tgt<i>_{x,y,z}          offset target point i    2 wrist-back), m
//   obj<i>_{x,y,z}          object target point i (no offset), m
//   dist<i>                 |tgt<i> - grip<i>|, m
//   hand_{x,y,z}            filtered palm position, m
//   hand_q{w,x,y,z}         filtered palm orientation quaternion
//   raw_{x,y,z}             raw palm position, m
//   hand_v{x,y,z}           estimated palm velocity, m/s
//   region<r>_{x,y,z}       repulsive region centers, m
//   force<i>_{x,y,z}        spring + damper force at paired point i, N
//   rep<j>_{x,y,z}          repulsive force at finger j (0 left, 1 right), N
//   kinetic, spring_energy  J

#ifndef HVMC_TRAJECTORY_LOG_HPP_
#define HVMC_TRAJECTORY_LOG_HPP_

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hvmc/gripper_control.hpp"
#include "hvmc/kinematics.hpp"

namespace hvmc {

struct TickRecord {
  double t = 0.0;
  Eigen::VectorXd q;
  Eigen::VectorXd qdot;
  Eigen::VectorXd tau;
  double alpha = 0.0;
  GripperPhase phase = GripperPhase::kTracking;
  GripperCommand command = GripperCommand::kNone;
  bool fingers_closed = false;
  std::array<Vec3, 3> gripper_points;
  std::array<Vec3, 3> target_points;
  std::array<Vec3, 3> object_points;
  std::array<double, 3> pair_distances{};
  Pose hand_pose;
  Vec3 hand_raw = Vec3::Zero();
  Vec3 hand_velocity = Vec3::Zero();
  std::vector<Vec3> region_centers;
  std::array<Vec3, 3> pair_forces;       // spring1 + spring2 + damper
  std::array<Vec3, 2> repulsive_forces;  // summed over regions, per finger
  double kinetic_energy = 0.0;
  double spring_energy = 0.0;
};

struct TrajectoryLog {
  std::string config_hash;
  double dt = 0.001;
  std::string end_reason;  // "done", "duration", "timeout", ...
  std::vector<TickRecord> records;
};

void write_csv(const TrajectoryLog& log, std::ostream& out);
void write_ndjson(const TrajectoryLog& log, std::ostream& out);
void write_log_file(const TrajectoryLog& log,
                    const std::filesystem::path& path);

// Reads the CSV form back.
TrajectoryLog read_csv(std::istream& in);
TrajectoryLog read_log_file(const std::filesystem::path& path);

}  // namespace hvmc

#endif  // HVMC_TRAJECTORY_LOG_HPP_
