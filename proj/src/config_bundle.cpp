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

#include "hvmc/config_bundle.hpp"

#include <cstdlib>
#include <numbers>

#include "hvmc/json_io.hpp"

#ifndef HVMC_DATA_DIR
#define HVMC_DATA_DIR "data"
#endif

namespace hvmc {

using json_io::json;
namespace fs = std::filesystem;

fs::path data_dir() {
  if (const char* env = std::getenv("HVMC_DATA_DIR"); env && *env) {
    return fs::path(env);
  }
  return fs::path(HVMC_DATA_DIR);
}

fs::path resolve_data_path(const fs::path& p, const fs::path& base_dir) {
  if (p.is_absolute()) return p;
  if (!base_dir.empty() && fs::exists(base_dir / p)) return base_dir / p;
  if (fs::exists(p)) return p;
  if (fs::exists(data_dir() / p)) return data_dir() / p;
  return p;
}

void SceneParams::validate(int dof) const {
  auto fail = [](const std::string& key, const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, msg, "scene." + key);
  };
  if (robot_home.size() != dof) fail("robot_home", "wrong joint count");
  if ((workspace_min.array() >= workspace_max.array()).any()) {
    fail("workspace_min", "must be below workspace_max");
  }
  auto range = [&](double lo, double hi, const std::string& key) {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo >= 0.0 && lo <= hi)) {
      fail(key, "needs 0 <= min <= max");
    }
  };
  range(translation_min, translation_max, "translation_min");
  range(rotation_min_deg, rotation_max_deg, "rotation_min_deg");
  range(start_distance_min, start_distance_max, "start_distance_min");
  range(displacement_min, displacement_max, "displacement_min");
  if (!(motion_duration > 0.0)) fail("motion_duration", "must be > 0");
  if (!(motion_start >= 0.0)) fail("motion_start", "must be >= 0");
  if (!(displacement_delay >= 0.0)) fail("displacement_delay", "must be >= 0");
  if (!(start_spread > 0.0)) fail("start_spread", "must be > 0");
  if (!(below_hand_fraction >= 0.0 && below_hand_fraction <= 1.0)) {
    fail("below_hand_fraction", "must be in [0, 1]");
  }
  if (!(timeout > 0.0)) fail("timeout", "must be > 0");
  if (!(success_distance > 0.0)) fail("success_distance", "must be > 0");
  if (!(success_angle_deg > 0.0)) fail("success_angle_deg", "must be > 0");
  if (!(max_approach_tilt_deg > 0.0 && max_approach_tilt_deg <= 180.0)) {
    fail("max_approach_tilt_deg", "must be in (0, 180]");
  }
}

SceneParams scene_params_from_json(const json& j, const SceneParams& base,
                                   const std::string& path) {
  SceneParams s = base;
  if (j.contains("hand_nominal")) {
    s.hand_nominal =
        pose_from_json(j["hand_nominal"], json_io::join(path, "hand_nominal"));
  }
  if (j.contains("robot_home")) {
    const json& h = j["robot_home"];
    const std::string hp = json_io::join(path, "robot_home");
    if (!h.is_array()) json_io::fail(hp, "expected an array");
    s.robot_home.resize(static_cast<Eigen::Index>(h.size()));
    for (std::size_t k = 0; k < h.size(); ++k) {
      s.robot_home[static_cast<Eigen::Index>(k)] = json_io::as_number(h[k], hp);
    }
  }
  s.workspace_min = json_io::vec3_or(j, "workspace_min", s.workspace_min, path);
  s.workspace_max = json_io::vec3_or(j, "workspace_max", s.workspace_max, path);
  s.rotation_pivot =
      json_io::vec3_or(j, "rotation_pivot", s.rotation_pivot, path);
  auto num = [&](const char* key, double& v) {
    v = json_io::number_or(j, key, v, path);
  };
  num("max_approach_tilt_deg", s.max_approach_tilt_deg);
  num("translation_min", s.translation_min);
  num("translation_max", s.translation_max);
  num("rotation_min_deg", s.rotation_min_deg);
  num("rotation_max_deg", s.rotation_max_deg);
  num("motion_start", s.motion_start);
  num("motion_duration", s.motion_duration);
  num("start_distance_min", s.start_distance_min);
  num("start_distance_max", s.start_distance_max);
  num("start_spread", s.start_spread);
  num("below_hand_fraction", s.below_hand_fraction);
  num("below_hand_margin", s.below_hand_margin);
  num("displacement_min", s.displacement_min);
  num("displacement_max", s.displacement_max);
  num("displacement_delay", s.displacement_delay);
  num("timeout", s.timeout);
  num("success_distance", s.success_distance);
  num("success_angle_deg", s.success_angle_deg);
  return s;
}

json to_json(const SceneParams& s) {
  return {{"hand_nominal", to_json(s.hand_nominal)},
          {"robot_home", std::vector<double>(s.robot_home.data(),
                                             s.robot_home.data() +
                                                 s.robot_home.size())},
          {"workspace_min", json_io::to_json(s.workspace_min)},
          {"workspace_max", json_io::to_json(s.workspace_max)},
          {"max_approach_tilt_deg", s.max_approach_tilt_deg},
          {"translation_min", s.translation_min},
          {"translation_max", s.translation_max},
          {"rotation_min_deg", s.rotation_min_deg},
          {"rotation_max_deg", s.rotation_max_deg},
          {"rotation_pivot", json_io::to_json(s.rotation_pivot)},
          {"motion_start", s.motion_start},
          {"motion_duration", s.motion_duration},
          {"start_distance_min", s.start_distance_min},
          {"start_distance_max", s.start_distance_max},
          {"start_spread", s.start_spread},
          {"below_hand_fraction", s.below_hand_fraction},
          {"below_hand_margin", s.below_hand_margin},
          {"displacement_min", s.displacement_min},
          {"displacement_max", s.displacement_max},
          {"displacement_delay", s.displacement_delay},
          {"timeout", s.timeout},
          {"success_distance", s.success_distance},
          {"success_angle_deg", s.success_angle_deg}};
}

void ConfigBundle::validate() const {
  controller.validate(chain.dof());
  fsm.validate();
  filters.validate();
  plant.validate(chain.dof());
  scene.validate(chain.dof());
  if (!(stream_hz >= 1.0 && stream_hz <= 120.0)) {
    throw Error(ErrorCode::kInvalidArgument, "must be in [1, 120]",
                "stream_hz");
  }
}

json ConfigBundle::to_json() const {
  json fsm_json = hvmc::to_json(fsm);
  return {{"chain", chain_path.generic_string()},
          {"controller", hvmc::to_json(controller)},
          {"gripper", fsm_json},
          {"filters", hvmc::to_json(filters)},
          {"plant", hvmc::to_json(plant)},
          {"scene", hvmc::to_json(scene)},
          {"stream_hz", stream_hz}};
}

ConfigBundle config_bundle_from_json(const json& j, const fs::path& base_dir,
                                     const BundleOverrides& overrides) {
  if (!j.is_object()) json_io::fail("config", "expected an object");
  fs::path chain_path = overrides.chain
                            ? *overrides.chain
                            : fs::path(j.contains("chain")
                                           ? json_io::string(j, "chain", "")
                                           : "chains/panda7.json");
  chain_path = resolve_data_path(chain_path, overrides.chain ? "" : base_dir);
  if (!fs::exists(chain_path)) {
    throw Error(ErrorCode::kNotFound, "chain file not found: " +
                chain_path.string(), "chain");
  }
  KinematicChain chain = load_chain_file(chain_path);

  ControllerConfig controller;
  controller.torque_limits = Eigen::VectorXd();
  if (j.contains("controller")) {
    controller = controller_config_from_json(j["controller"], controller,
                                             "controller");
  }
  FsmThresholds fsm;
  fsm.alpha_default = controller.alpha_default;
  if (j.contains("gripper")) {
    fsm = fsm_thresholds_from_json(j["gripper"], fsm, "gripper");
  }
  if (fsm.alpha_default != controller.alpha_default) {
    throw Error(ErrorCode::kInvalidArgument,
                "must equal controller.alpha_default", "gripper.alpha_default");
  }
  FilterParams filters;
  if (j.contains("filters")) {
    filters = filter_params_from_json(j["filters"], filters, "filters");
  }
  PlantParams plant = j.contains("plant")
                          ? plant_params_from_json(j["plant"], chain, "plant")
                          : PlantParams::Default(chain);

  SceneParams scene;
  scene.hand_nominal = Pose::FromRpy(Vec3(0.5, 0.0, 0.3),
                                     Vec3(0.0, 0.0, std::numbers::pi));
  scene.robot_home = Eigen::VectorXd::Zero(chain.dof());
  if (j.contains("scene")) {
    scene = scene_params_from_json(j["scene"], scene, "scene");
  }

  ConfigBundle b{chain_path, std::move(chain), controller, fsm, filters,
                 plant,      scene,            60.0};
  b.stream_hz = json_io::number_or(j, "stream_hz", b.stream_hz, "");
  if (overrides.profile) {
    b.controller = apply_profile(b.controller, *overrides.profile);
  }
  if (overrides.stream_hz) b.stream_hz = *overrides.stream_hz;
  b.validate();
  return b;
}

ConfigBundle load_config_bundle(const std::optional<fs::path>& config,
                                const BundleOverrides& overrides) {
  const fs::path path =
      config ? *config : data_dir() / "config" / "default.json";
  const json j = json_io::parse_file(path);
  return config_bundle_from_json(j, path.parent_path(), overrides);
}

}  // namespace hvmc
