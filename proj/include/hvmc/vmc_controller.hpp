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

// Virtual model controller: attraction between paired points, repulsive
// regions in front of the hand, and the Jacobian-transpose torque map.

#ifndef HVMC_VMC_CONTROLLER_HPP_
#define HVMC_VMC_CONTROLLER_HPP_

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hvmc/kinematics.hpp"
#include "hvmc/virtual_mechanisms.hpp"

namespace hvmc {

enum class Profile { kAuthoritative, kCooperative };

std::string_view to_string(Profile p);
Profile parse_profile(std::string_view name);

struct RepulsiveRegionSpec {
  RepulsiveRegionParams params{30.0, 0.1};
  // Distance of the center from the hand along the palm normal.
  double placement = 0.23;
};

struct ControllerConfig {
  GraspSpec grasp;
  Pose object_in_hand;

  SaturatedSpringParams spring1{30.0, 150.0};
  SaturatedSpringParams spring2{8.0, 800.0};
  // Value restored by the authoritative profile.
  double spring2_nominal_f_max = 8.0;
  VariableDamperParams damper{5.0, 25.0, 10.0};

  std::vector<RepulsiveRegionSpec> repulsive;
  double alpha_default = 0.10;
  double beta_placement = 0.23;
  Vec3 palm_normal_local = Vec3::UnitX();

  Profile profile = Profile::kAuthoritative;
  Eigen::VectorXd torque_limits;
  std::string gripper_base_attachment = "gripper_base";

  void validate(int dof) const;
};

// Parses the "controller" section of a config file. Missing keys keep the
// defaults of `base`.
ControllerConfig controller_config_from_json(const nlohmann::json& j,
                                             const ControllerConfig& base,
                                             const std::string& path);
nlohmann::json to_json(const ControllerConfig& c);

// cooperative: spring2.f_max = 0; authoritative: spring2.f_max restored.
ControllerConfig apply_profile(const ControllerConfig& config,
                               Profile profile);
ControllerConfig apply_profile(const ControllerConfig& config,
                               std::string_view profile);

std::vector<Vec3> place_repulsive_regions(const Pose& hand_pose,
                                          const ControllerConfig& config);

enum class ComponentKind { kSpring1, kSpring2, kDamper, kRepulsive };

struct ForceRecord {
  ComponentKind kind = ComponentKind::kSpring1;
  int pair = 0;    // paired-point index the force is applied at
  int region = -1; // repulsive region index, -1 otherwise
  Vec3 point = Vec3::Zero();
  Vec3 force = Vec3::Zero();
};

// Stable identifier such as "spring1/0" or "repulsive0/1".
std::string component_id(const ForceRecord& r);

struct ControllerOutput {
  Eigen::VectorXd tau;
  Eigen::VectorXd tau_unclamped;
  std::vector<ForceRecord> forces;
  std::vector<int> clamped_joints;
  std::array<PairedPointState, 3> pairs;
  std::array<double, 3> pair_distances{};
  std::array<Vec3, 3> grasp_points;  // target points before the offset
  std::vector<Vec3> region_centers;
  Vec3 gripper_base = Vec3::Zero();
};

// tau = sum_i J_i^T F_i over every spring, damper and repulsive force, then
// clamped elementwise to the torque limits. `chain` must carry the paired
// attachments (with_grasp_links). Repulsive regions farther than 5 sigma
// from a finger point are skipped.
ControllerOutput compute_torques(const KinematicChain& chain,
                                 const JointState& state,
                                 const Pose& hand_pose,
                                 const Vec3& hand_velocity, double alpha,
                                 const ControllerConfig& config,
                                 OffsetDirectionCache& cache);

}  // namespace hvmc

#endif  // HVMC_VMC_CONTROLLER_HPP_
