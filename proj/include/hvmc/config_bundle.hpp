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

// Everything a session needs besides the scenario: chain, controller,
// gripper thresholds, filters, plant and the scene used by the experiment
// generators. Loaded from one JSON file:
//
//   {
//     "chain": "chains/panda7.json",      relative to the file, then data dir
//     "controller": {...}, "gripper": {...}, "filters": {...},
//     "plant": {...}, "scene": {...}, "stream_hz": 60
//   }

#ifndef HVMC_CONFIG_BUNDLE_HPP_
#define HVMC_CONFIG_BUNDLE_HPP_

#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "hvmc/gripper_control.hpp"
#include "hvmc/hand_signal.hpp"
#include "hvmc/kinematics.hpp"
#include "hvmc/plant_sim.hpp"
#include "hvmc/vmc_controller.hpp"

namespace hvmc {

// Bundled data directory. HVMC_DATA_DIR in the environment wins over the
// build-time location.
std::filesystem::path data_dir();

// Resolves `p` against `base_dir` first, then the data directory.
std::filesystem::path resolve_data_path(const std::filesystem::path& p,
                                        const std::filesystem::path& base_dir);

struct SceneParams {
  Pose hand_nominal;
  Eigen::VectorXd robot_home;
  // Bounds on the object grasp centroid after every scripted motion.
  Vec3 workspace_min{0.30, -0.30, 0.10};
  Vec3 workspace_max{0.65, 0.30, 0.55};
  // Largest allowed angle between the grasp approach and world -z.
  double max_approach_tilt_deg = 45.0;

  double translation_min = 0.10;  // m
  double translation_max = 0.40;
  double rotation_min_deg = 20.0;
  double rotation_max_deg = 90.0;
  Vec3 rotation_pivot{-0.08, 0.0, 0.0};  // palm frame, roughly the wrist
  double motion_start = 0.3;      // s after the robot starts
  double motion_duration = 1.0;   // s

  double start_distance_min = 0.4;  // m, gripper to grasp centroid
  double start_distance_max = 0.9;
  double start_spread = 1.0;        // rad, half-width around robot_home
  double below_hand_fraction = 0.25;
  double below_hand_margin = 0.05;  // m, tcp below the palm by at least
  double displacement_min = 0.05;   // m, after the final approach starts
  double displacement_max = 0.20;
  double displacement_delay = 0.2;  // s after the final approach starts

  double timeout = 30.0;            // s of simulated time
  double success_distance = 0.02;   // m, per finger pair at closure
  double success_angle_deg = 15.0;

  void validate(int dof) const;
};

SceneParams scene_params_from_json(const nlohmann::json& j,
                                   const SceneParams& base,
                                   const std::string& path);
nlohmann::json to_json(const SceneParams& s);

struct ConfigBundle {
  std::filesystem::path chain_path;
  KinematicChain chain;
  ControllerConfig controller;
  FsmThresholds fsm;
  FilterParams filters;
  PlantParams plant;
  SceneParams scene;
  double stream_hz = 60.0;

  void validate() const;
  nlohmann::json to_json() const;
};

struct BundleOverrides {
  std::optional<std::filesystem::path> chain;
  std::optional<std::string> profile;
  std::optional<double> stream_hz;
};

// Loads `config` (the bundled default config when empty) and applies the
// overrides. Throws Error(kParse / kInvalidArgument / kNotFound) naming the
// offending key or file.
ConfigBundle load_config_bundle(
    const std::optional<std::filesystem::path>& config,
    const BundleOverrides& overrides = {});

ConfigBundle config_bundle_from_json(const nlohmann::json& j,
                                     const std::filesystem::path& base_dir,
                                     const BundleOverrides& overrides = {});

}  // namespace hvmc

#endif  // HVMC_CONFIG_BUNDLE_HPP_
