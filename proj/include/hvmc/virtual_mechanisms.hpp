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

// Force laws of the virtual components and the paired-point geometry that
// connects the gripper to the object.
//
// Sign conventions used throughout:
//   p   = target point - gripper point     (spring / damper displacement)
//   p_r = gripper point - region center    (repulsive displacement)
// Every returned force is the force applied to the gripper-side point.

#ifndef HVMC_VIRTUAL_MECHANISMS_HPP_
#define HVMC_VIRTUAL_MECHANISMS_HPP_

#include <array>
#include <optional>
#include <string>

#include "hvmc/common.hpp"
#include "hvmc/kinematics.hpp"

namespace hvmc {

// Tanh-saturated spring. f_max == 0 disables the spring (used by the
// cooperative profile); otherwise f_max > 0 and stiffness > 0.
struct SaturatedSpringParams {
  double f_max = 0.0;      // N
  double stiffness = 0.0;  // N/m

  void validate(const std::string& where) const;
};

struct VariableDamperParams {
  double c1 = 0.0;      // N s/m, minimum damping
  double c2 = 0.0;      // N s/m, c1 + c2 is the maximum damping
  double beta_d = 1.0;  // 1/m, position sensitivity

  void validate(const std::string& where) const;
};

class RepulsiveRegionParams {
 public:
  RepulsiveRegionParams(double f_max, double sigma);

  double f_max() const { return f_max_; }
  double sigma() const { return sigma_; }
  // k_r = (f_max / sigma) * exp(0.5), so the peak force is f_max at sigma.
  double stiffness() const { return stiffness_; }

 private:
  double f_max_;
  double sigma_;
  double stiffness_;
};

// F = f_max tanh(k |p| / f_max) p / |p|; zero for |p| < 1e-12.
Vec3 saturated_spring_force(const SaturatedSpringParams& params, const Vec3& p);

// U = (f_max^2 / k) ln cosh(k |p| / f_max). dU/dp equals the spring force.
double saturated_spring_potential(const SaturatedSpringParams& params,
                                  const Vec3& p);

double damping_coefficient(const VariableDamperParams& params, double distance);

// F = (c1 + c2 tanh(beta_d |p|)) pdot, with pdot the rate of change of
// p = target - gripper. The force therefore drives pdot toward zero.
Vec3 damper_force(const VariableDamperParams& params, const Vec3& p,
                  const Vec3& pdot);

// F = k_r exp(-|p_r|^2 / (2 sigma^2)) p_r, pointing away from the center.
Vec3 repulsive_force(const RepulsiveRegionParams& params, const Vec3& p_r);

// E = k_r sigma^2 exp(-|p_r|^2 / (2 sigma^2)); -dE/dp_r is the force above.
double repulsive_energy(const RepulsiveRegionParams& params, const Vec3& p_r);

enum PairIndex : int { kLeftFinger = 0, kRightFinger = 1, kWristBack = 2 };

// Grasp description for one object. Target points are object-local; the
// wrist-back target sits `link_length` behind the finger midpoint along the
// approach direction, mirroring the gripper-side virtual rigid link.
struct GraspSpec {
  // Top-down grasp 6 cm wide at the object origin.
  std::array<Vec3, 3> target_points = {Vec3(0.0, 0.03, 0.0),
                                       Vec3(0.0, -0.03, 0.0),
                                       Vec3(0.0, 0.0, 0.45)};
  std::array<std::string, 3> gripper_attachments = {"finger_left",
                                                    "finger_right", "tcp"};
  double link_length = 0.45;

  static GraspSpec FromFingers(const Vec3& left, const Vec3& right,
                               const Vec3& approach, double link_length);

  void validate() const;
};

// Attachment names of the gripper-side paired points on a chain prepared
// by `with_grasp_links`.
inline constexpr std::array<const char*, 3> kPairedAttachmentNames = {
    "vmc_left", "vmc_right", "vmc_back"};

// Returns `chain` extended with the three gripper-side paired points: the
// two finger points and the wrist point pushed back by the rigid link along
// the attachment's -z (approach) axis.
KinematicChain with_grasp_links(const KinematicChain& chain,
                                const GraspSpec& grasp);

struct PairedPointState {
  Vec3 gripper_point = Vec3::Zero();
  Vec3 target_point = Vec3::Zero();
  Vec3 p = Vec3::Zero();     // target_point - gripper_point
  Vec3 pdot = Vec3::Zero();  // target velocity - gripper velocity
};

// Carries the last valid offset direction across control ticks.
struct OffsetDirectionCache {
  std::optional<Vec3> last;
};

// Unit vector from the grasp-target centroid toward the gripper base. Falls
// back to the cached direction (or world +z) when the two coincide.
Vec3 offset_direction(const Vec3& centroid, const Vec3& gripper_base,
                      OffsetDirectionCache& cache);

// Object-attached target points, before the offset is applied.
std::array<Vec3, 3> grasp_points(const Pose& object_pose,
                                 const GraspSpec& grasp);

// `chain` must carry the paired attachments (see with_grasp_links).
std::array<PairedPointState, 3> paired_points(
    const ChainFrames& frames, const JointState& state,
    const Pose& object_pose, const GraspSpec& grasp, double alpha,
    const Vec3& gripper_base, OffsetDirectionCache& cache,
    const Vec3& target_velocity = Vec3::Zero());

std::array<PairedPointState, 3> paired_points(
    const KinematicChain& chain, const JointState& state,
    const Pose& object_pose, const GraspSpec& grasp, double alpha,
    const Vec3& gripper_base, OffsetDirectionCache& cache,
    const Vec3& target_velocity = Vec3::Zero());

}  // namespace hvmc

#endif  // HVMC_VIRTUAL_MECHANISMS_HPP_
