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

#include "hvmc/vmc_controller.hpp"

#include <cmath>

#include "hvmc/json_io.hpp"

namespace hvmc {

using json_io::json;

std::string_view to_string(Profile p) {
  return p == Profile::kAuthoritative ? "authoritative" : "cooperative";
}

Profile parse_profile(std::string_view name) {
  if (name == "authoritative") return Profile::kAuthoritative;
  if (name == "cooperative") return Profile::kCooperative;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown profile '" + std::string(name) + "'", "profile");
}

void ControllerConfig::validate(int dof) const {
  grasp.validate();
  spring1.validate("controller.spring1");
  spring2.validate("controller.spring2");
  if (!(spring2_nominal_f_max >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "must be >= 0",
                "controller.spring2.f_max");
  }
  damper.validate("controller.damper");
  if (!std::isfinite(alpha_default) || alpha_default < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "must be >= 0",
                "controller.alpha_default");
  }
  if (!std::isfinite(beta_placement) || beta_placement <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "must be > 0",
                "controller.beta_placement");
  }
  if (palm_normal_local.norm() < 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "zero-norm palm normal",
                "controller.palm_normal_local");
  }
  if (torque_limits.size() != 0) {
    if (torque_limits.size() != dof) {
      throw Error(ErrorCode::kInvalidArgument,
                  "expected " + std::to_string(dof) + " entries",
                  "controller.torque_limits");
    }
    if ((torque_limits.array() <= 0.0).any() || !torque_limits.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument, "limits must be > 0",
                  "controller.torque_limits");
    }
  }
}

ControllerConfig controller_config_from_json(const json& j,
                                             const ControllerConfig& base,
                                             const std::string& path) {
  ControllerConfig c = base;
  if (!j.is_object()) json_io::fail(path, "expected an object");
  auto spring = [&](const char* key, SaturatedSpringParams& s) {
    if (!j.contains(key)) return;
    const std::string p = json_io::join(path, key);
    s.f_max = json_io::number_or(j[key], "f_max", s.f_max, p);
    s.stiffness = json_io::number_or(j[key], "stiffness", s.stiffness, p);
    s.validate(p);
  };
  spring("spring1", c.spring1);
  spring("spring2", c.spring2);
  c.spring2_nominal_f_max = c.spring2.f_max;
  if (j.contains("damper")) {
    const std::string p = json_io::join(path, "damper");
    c.damper.c1 = json_io::number_or(j["damper"], "c1", c.damper.c1, p);
    c.damper.c2 = json_io::number_or(j["damper"], "c2", c.damper.c2, p);
    c.damper.beta_d =
        json_io::number_or(j["damper"], "beta_d", c.damper.beta_d, p);
    c.damper.validate(p);
  }
  c.alpha_default =
      json_io::number_or(j, "alpha_default", c.alpha_default, path);
  c.beta_placement =
      json_io::number_or(j, "beta_placement", c.beta_placement, path);
  c.palm_normal_local =
      json_io::vec3_or(j, "palm_normal_local", c.palm_normal_local, path);
  if (j.contains("repulsive")) {
    const std::string p = json_io::join(path, "repulsive");
    if (!j["repulsive"].is_array()) json_io::fail(p, "expected an array");
    c.repulsive.clear();
    for (std::size_t i = 0; i < j["repulsive"].size(); ++i) {
      const json& r = j["repulsive"][i];
      const std::string rp = p + "[" + std::to_string(i) + "]";
      const double f_max = json_io::number(r, "f_max", rp);
      const double sigma = json_io::number(r, "sigma", rp);
      if (f_max <= 0.0) json_io::fail(rp + ".f_max", "must be > 0");
      if (sigma <= 0.0) json_io::fail(rp + ".sigma", "must be > 0");
      RepulsiveRegionSpec spec{RepulsiveRegionParams(f_max, sigma),
                               json_io::number_or(r, "placement",
                                                  c.beta_placement, rp)};
      c.repulsive.push_back(spec);
    }
  }
  if (j.contains("profile")) {
    try {
      c.profile = parse_profile(json_io::string(j, "profile", path));
    } catch (const Error& e) {
      json_io::fail(json_io::join(path, "profile"), e.what());
    }
  }
  if (j.contains("torque_limits")) {
    const std::string p = json_io::join(path, "torque_limits");
    const json& t = j["torque_limits"];
    if (!t.is_array()) json_io::fail(p, "expected an array");
    c.torque_limits.resize(static_cast<int>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) {
      c.torque_limits[static_cast<int>(i)] = json_io::as_number(t[i], p);
    }
  }
  if (j.contains("gripper_base_attachment")) {
    c.gripper_base_attachment =
        json_io::string(j, "gripper_base_attachment", path);
  }
  if (j.contains("link_length")) {
    const double l = json_io::number(j, "link_length", path);
    if (l < 0.0) json_io::fail(json_io::join(path, "link_length"), "must be >= 0");
    c.grasp.link_length = l;
  }
  return apply_profile(c, c.profile);
}

json to_json(const ControllerConfig& c) {
  json j;
  j["spring1"] = {{"f_max", c.spring1.f_max},
                  {"stiffness", c.spring1.stiffness}};
  j["spring2"] = {{"f_max", c.spring2_nominal_f_max},
                  {"stiffness", c.spring2.stiffness}};
  j["damper"] = {
      {"c1", c.damper.c1}, {"c2", c.damper.c2}, {"beta_d", c.damper.beta_d}};
  j["repulsive"] = json::array();
  for (const RepulsiveRegionSpec& r : c.repulsive) {
    j["repulsive"].push_back({{"f_max", r.params.f_max()},
                              {"sigma", r.params.sigma()},
                              {"placement", r.placement}});
  }
  j["alpha_default"] = c.alpha_default;
  j["beta_placement"] = c.beta_placement;
  j["palm_normal_local"] = json_io::to_json(c.palm_normal_local);
  j["profile"] = std::string(to_string(c.profile));
  j["torque_limits"] = json::array();
  for (int i = 0; i < c.torque_limits.size(); ++i) {
    j["torque_limits"].push_back(c.torque_limits[i]);
  }
  j["gripper_base_attachment"] = c.gripper_base_attachment;
  j["link_length"] = c.grasp.link_length;
  return j;
}

ControllerConfig apply_profile(const ControllerConfig& config,
                               Profile profile) {
  ControllerConfig out = config;
  out.profile = profile;
  out.spring2.f_max =
      profile == Profile::kCooperative ? 0.0 : config.spring2_nominal_f_max;
  return out;
}

ControllerConfig apply_profile(const ControllerConfig& config,
                               std::string_view profile) {
  return apply_profile(config, parse_profile(profile));
}

std::vector<Vec3> place_repulsive_regions(const Pose& hand_pose,
                                          const ControllerConfig& config) {
  const Vec3 normal =
      hand_pose.orientation * config.palm_normal_local.normalized();
  std::vector<Vec3> centers;
  centers.reserve(config.repulsive.size());
  for (const RepulsiveRegionSpec& r : config.repulsive) {
    centers.push_back(hand_pose.position + r.placement * normal);
  }
  return centers;
}

std::string component_id(const ForceRecord& r) {
  switch (r.kind) {
    case ComponentKind::kSpring1:
      return "spring1/" + std::to_string(r.pair);
    case ComponentKind::kSpring2:
      return "spring2/" + std::to_string(r.pair);
    case ComponentKind::kDamper:
      return "damper/" + std::to_string(r.pair);
    case ComponentKind::kRepulsive:
      return "repulsive" + std::to_string(r.region) + "/" +
             std::to_string(r.pair);
  }
  return "unknown";
}

ControllerOutput compute_torques(const KinematicChain& chain,
                                 const JointState& state,
                                 const Pose& hand_pose,
                                 const Vec3& hand_velocity, double alpha,
                                 const ControllerConfig& config,
                                 OffsetDirectionCache& cache) {
  chain.check_state(state);
  const ChainFrames frames(chain, state.q);
  const Pose object_pose = hand_pose * config.object_in_hand;

  ControllerOutput out;
  out.gripper_base = frames.position(config.gripper_base_attachment);
  out.pairs = paired_points(frames, state, object_pose, config.grasp, alpha,
                            out.gripper_base, cache, hand_velocity);
  out.grasp_points = grasp_points(object_pose, config.grasp);
  out.region_centers = place_repulsive_regions(hand_pose, config);

  std::array<PointJacobian, 3> jacobians;
  for (int i = 0; i < 3; ++i) {
    jacobians[i] = frames.jacobian(kPairedAttachmentNames[i]);
    out.pair_distances[i] = out.pairs[i].p.norm();
  }

  out.tau_unclamped = Eigen::VectorXd::Zero(chain.dof());
  out.forces.reserve(9 + 2 * config.repulsive.size());
  auto apply = [&](ComponentKind kind, int pair, int region, const Vec3& f) {
    ForceRecord rec{kind, pair, region, out.pairs[pair].gripper_point, f};
    if (!f.allFinite()) {
      throw Error(ErrorCode::kNonFinite, "non-finite force",
                  component_id(rec));
    }
    out.tau_unclamped.noalias() += jacobians[pair].transpose() * f;
    out.forces.push_back(rec);
  };

  for (int i = 0; i < 3; ++i) {
    const PairedPointState& s = out.pairs[i];
    apply(ComponentKind::kSpring1, i, -1,
          saturated_spring_force(config.spring1, s.p));
    apply(ComponentKind::kSpring2, i, -1,
          saturated_spring_force(config.spring2, s.p));
    apply(ComponentKind::kDamper, i, -1,
          damper_force(config.damper, s.p, s.pdot));
  }
  for (std::size_t r = 0; r < config.repulsive.size(); ++r) {
    const RepulsiveRegionParams& params = config.repulsive[r].params;
    for (int finger : {kLeftFinger, kRightFinger}) {
      const Vec3 p_r = out.pairs[finger].gripper_point - out.region_centers[r];
      if (p_r.norm() > 5.0 * params.sigma()) continue;
      apply(ComponentKind::kRepulsive, finger, static_cast<int>(r),
            repulsive_force(params, p_r));
    }
  }

  out.tau = out.tau_unclamped;
  if (config.torque_limits.size() == chain.dof()) {
    for (int k = 0; k < chain.dof(); ++k) {
      const double lim = config.torque_limits[k];
      if (std::abs(out.tau[k]) > lim) {
        out.tau[k] = std::copysign(lim, out.tau[k]);
        out.clamped_joints.push_back(k);
      }
    }
  }
  return out;
}

}  // namespace hvmc
