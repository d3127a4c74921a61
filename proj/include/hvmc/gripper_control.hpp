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

#ifndef HVMC_GRIPPER_CONTROL_HPP_
#define HVMC_GRIPPER_CONTROL_HPP_

#include <array>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

namespace hvmc {

enum class GripperPhase { kTracking, kFinalApproach, kGrasping, kDone };
enum class GripperCommand { kNone, kCloseFingers, kOpenFingers };

std::string_view to_string(GripperPhase p);
std::string_view to_string(GripperCommand c);
GripperPhase parse_phase(std::string_view s);

struct FsmThresholds {
  double d_activate = 0.10;   // m, every pair must be closer to activate
  double d_grasp = 0.05;      // m, every pair must be closer while dwelling
  double t_dwell = 1.0;       // s
  double v_low = 0.03;        // m/s, hand counts as still below this
  double ramp_rate = 0.2;     // m/s, offset reduction rate
  double alpha_default = 0.10;

  void validate() const;
};

FsmThresholds fsm_thresholds_from_json(const nlohmann::json& j,
                                       const FsmThresholds& base,
                                       const std::string& path);
nlohmann::json to_json(const FsmThresholds& t);

struct GripperFsm {
  GripperPhase phase = GripperPhase::kTracking;
  double alpha = 0.10;
  double dwell_clock = 0.0;
  FsmThresholds thresholds;

  static GripperFsm Initial(const FsmThresholds& t) {
    return {GripperPhase::kTracking, t.alpha_default, 0.0, t};
  }
};

struct FsmObservation {
  std::array<double, 3> pair_distances{};
  double hand_speed = 0.0;
  bool fingers_closed = false;
};

// Advances the gripper state machine by one tick.
//
//   TRACKING       -> FINAL_APPROACH  hand still and every pair < d_activate
//   FINAL_APPROACH -> GRASPING        every pair < d_grasp for t_dwell (close)
//   GRASPING       -> DONE            fingers report closed
//   any but DONE   -> TRACKING        hand moving or a pair >= d_activate
//                                     (alpha reset, fingers reopened)
//
// The dwell clock only runs while every pair is below d_grasp; one tick
// outside resets it. DONE is absorbing. Throws for dt <= 0.
std::pair<GripperFsm, GripperCommand> step_fsm(const GripperFsm& fsm,
                                               const FsmObservation& obs,
                                               double dt);

}  // namespace hvmc

#endif  // HVMC_GRIPPER_CONTROL_HPP_
