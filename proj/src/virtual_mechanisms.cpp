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

#include "hvmc/virtual_mechanisms.hpp"

#include <cmath>

namespace hvmc {

namespace {

constexpr double kMinDisplacement = 1e-12;
constexpr double kMinOffsetSeparation = 1e-6;

// ln(cosh(x)) without overflow for large |x|.
double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - std::log(2.0);
}

}  // namespace

void SaturatedSpringParams::validate(const std::string& where) const {
  if (!std::isfinite(f_max) || f_max < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "f_max must be >= 0",
                where + ".f_max");
  }
  if (!std::isfinite(stiffness) || stiffness <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "stiffness must be > 0",
                where + ".stiffness");
  }
}

void VariableDamperParams::validate(const std::string& where) const {
  if (!std::isfinite(c1) || c1 < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "c1 must be >= 0", where + ".c1");
  }
  if (!std::isfinite(c2) || c1 + c2 < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "c1 + c2 must be >= 0",
                where + ".c2");
  }
  if (!std::isfinite(beta_d) || beta_d <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "beta_d must be > 0",
                where + ".beta_d");
  }
}

RepulsiveRegionParams::RepulsiveRegionParams(double f_max, double sigma)
    : f_max_(f_max), sigma_(sigma) {
  if (!std::isfinite(f_max) || f_max <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "f_max must be > 0",
                "repulsive.f_max");
  }
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "sigma must be > 0",
                "repulsive.sigma");
  }
  stiffness_ = (f_max / sigma) * std::exp(0.5);
}

Vec3 saturated_spring_force(const SaturatedSpringParams& params,
                            const Vec3& p) {
  require_finite(p, "saturated_spring_force");
  const double dist = p.norm();
  if (dist < kMinDisplacement || params.f_max == 0.0) return Vec3::Zero();
  const double magnitude =
      params.f_max * std::tanh(params.stiffness * dist / params.f_max);
  return (magnitude / dist) * p;
}

double saturated_spring_potential(const SaturatedSpringParams& params,
                                  const Vec3& p) {
  require_finite(p, "saturated_spring_potential");
  if (params.f_max == 0.0) return 0.0;
  const double x = params.stiffness * p.norm() / params.f_max;
  return params.f_max * params.f_max / params.stiffness * log_cosh(x);
}

double damping_coefficient(const VariableDamperParams& params,
                           double distance) {
  return params.c1 + params.c2 * std::tanh(params.beta_d * distance);
}

Vec3 damper_force(const VariableDamperParams& params, const Vec3& p,
                  const Vec3& pdot) {
  require_finite(p, "damper_force.p");
  require_finite(pdot, "damper_force.pdot");
  return damping_coefficient(params, p.norm()) * pdot;
}

Vec3 repulsive_force(const RepulsiveRegionParams& params, const Vec3& p_r) {
  require_finite(p_r, "repulsive_force");
  const double s2 = params.sigma() * params.sigma();
  return params.stiffness() * std::exp(-p_r.squaredNorm() / (2.0 * s2)) * p_r;
}

double repulsive_energy(const RepulsiveRegionParams& params, const Vec3& p_r) {
  require_finite(p_r, "repulsive_energy");
  const double s2 = params.sigma() * params.sigma();
  return params.stiffness() * s2 * std::exp(-p_r.squaredNorm() / (2.0 * s2));
}

GraspSpec GraspSpec::FromFingers(const Vec3& left, const Vec3& right,
                                 const Vec3& approach, double link_length) {
  if (approach.norm() < 1e-12) {
    throw Error(ErrorCode::kInvalidArgument, "zero approach direction",
                "grasp.approach");
  }
  GraspSpec g;
  g.link_length = link_length;
  g.target_points[kLeftFinger] = left;
  g.target_points[kRightFinger] = right;
  g.target_points[kWristBack] =
      0.5 * (left + right) - link_length * approach.normalized();
  g.validate();
  return g;
}

void GraspSpec::validate() const {
  for (const Vec3& t : target_points) require_finite(t, "grasp.target_points");
  if (!std::isfinite(link_length) || link_length < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "link_length must be >= 0",
                "grasp.link_length");
  }
  const double area = 0.5 * (target_points[1] - target_points[0])
                                .cross(target_points[2] - target_points[0])
                                .norm();
  if (area <= 1e-6) {
    throw Error(ErrorCode::kInvalidArgument,
                "target points are collinear (area <= 1e-6 m^2)",
                "grasp.target_points");
  }
}

KinematicChain with_grasp_links(const KinematicChain& chain,
                                const GraspSpec& grasp) {
  KinematicChain out = chain;
  for (const char* name : kPairedAttachmentNames) {
    if (out.has_attachment(name)) out = out.without_attachment(name);
  }
  out = out.with_rigid_link(grasp.gripper_attachments[kLeftFinger],
                            kPairedAttachmentNames[kLeftFinger], Vec3::Zero());
  out = out.with_rigid_link(grasp.gripper_attachments[kRightFinger],
                            kPairedAttachmentNames[kRightFinger],
                            Vec3::Zero());
  out = out.with_rigid_link(grasp.gripper_attachments[kWristBack],
                            kPairedAttachmentNames[kWristBack],
                            Vec3(0.0, 0.0, -grasp.link_length));
  return out;
}

Vec3 offset_direction(const Vec3& centroid, const Vec3& gripper_base,
                      OffsetDirectionCache& cache) {
  const Vec3 d = gripper_base - centroid;
  const double n = d.norm();
  if (n < kMinOffsetSeparation) {
    return cache.last.value_or(Vec3::UnitZ());
  }
  cache.last = d / n;
  return *cache.last;
}

std::array<Vec3, 3> grasp_points(const Pose& object_pose,
                                 const GraspSpec& grasp) {
  std::array<Vec3, 3> out;
  for (int i = 0; i < 3; ++i) {
    out[i] = object_pose.transform(grasp.target_points[i]);
  }
  return out;
}

std::array<PairedPointState, 3> paired_points(
    const ChainFrames& frames, const JointState& state,
    const Pose& object_pose, const GraspSpec& grasp, double alpha,
    const Vec3& gripper_base, OffsetDirectionCache& cache,
    const Vec3& target_velocity) {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be >= 0",
                "paired_points");
  }
  const std::array<Vec3, 3> raw = grasp_points(object_pose, grasp);
  const Vec3 centroid = (raw[0] + raw[1] + raw[2]) / 3.0;
  const Vec3 shift = alpha * offset_direction(centroid, gripper_base, cache);
  std::array<PairedPointState, 3> out;
  for (int i = 0; i < 3; ++i) {
    PairedPointState& s = out[i];
    s.gripper_point = frames.position(kPairedAttachmentNames[i]);
    s.target_point = raw[i] + shift;
    s.p = s.target_point - s.gripper_point;
    const Vec3 gripper_velocity =
        frames.jacobian(kPairedAttachmentNames[i]) * state.qdot;
    s.pdot = target_velocity - gripper_velocity;
  }
  return out;
}

std::array<PairedPointState, 3> paired_points(
    const KinematicChain& chain, const JointState& state,
    const Pose& object_pose, const GraspSpec& grasp, double alpha,
    const Vec3& gripper_base, OffsetDirectionCache& cache,
    const Vec3& target_velocity) {
  chain.check_state(state);
  const ChainFrames frames(chain, state.q);
  return paired_points(frames, state, object_pose, grasp, alpha, gripper_base,
                       cache, target_velocity);
}

}  // namespace hvmc
