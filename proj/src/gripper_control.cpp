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

#include "hvmc/gripper_control.hpp"

#include <algorithm>
#include <cmath>

#include "hvmc/common.hpp"
#include "hvmc/json_io.hpp"

namespace hvmc {

namespace {

// Absorbs summation error so that 1000 ticks of 1 ms count as one second.
constexpr double kDwellEpsilon = 1e-9;

bool all_below(const std::array<double, 3>& d, double limit) {
  return std::all_of(d.begin(), d.end(), [&](double x) { return x < limit; });
}

}  // namespace

std::string_view to_string(GripperPhase p) {
  switch (p) {
    case GripperPhase::kTracking:
      return "TRACKING";
    case GripperPhase::kFinalApproach:
      return "FINAL_APPROACH";
    case GripperPhase::kGrasping:
      return "GRASPING";
    case GripperPhase::kDone:
      return "DONE";
  }
  return "UNKNOWN";
}

std::string_view to_string(GripperCommand c) {
  switch (c) {
    case GripperCommand::kNone:
      return "none";
    case GripperCommand::kCloseFingers:
      return "close_fingers";
    case GripperCommand::kOpenFingers:
      return "open_fingers";
  }
  return "unknown";
}

GripperPhase parse_phase(std::string_view s) {
  for (GripperPhase p :
       {GripperPhase::kTracking, GripperPhase::kFinalApproach,
        GripperPhase::kGrasping, GripperPhase::kDone}) {
    if (to_string(p) == s) return p;
  }
  throw Error(ErrorCode::kParse, "unknown phase '" + std::string(s) + "'");
}

void FsmThresholds::validate() const {
  auto positive = [](double v, const char* key) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "must be > 0",
                  std::string("gripper.") + key);
    }
  };
  positive(d_activate, "d_activate");
  positive(d_grasp, "d_grasp");
  positive(t_dwell, "t_dwell");
  positive(v_low, "v_low");
  positive(ramp_rate, "ramp_rate");
  if (d_grasp > d_activate) {
    throw Error(ErrorCode::kInvalidArgument, "must not exceed d_activate",
                "gripper.d_grasp");
  }
  if (!std::isfinite(alpha_default) || alpha_default < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "must be >= 0",
                "gripper.alpha_default");
  }
}

FsmThresholds fsm_thresholds_from_json(const nlohmann::json& j,
                                       const FsmThresholds& base,
                                       const std::string& path) {
  FsmThresholds t = base;
  t.d_activate = json_io::number_or(j, "d_activate", t.d_activate, path);
  t.d_grasp = json_io::number_or(j, "d_grasp", t.d_grasp, path);
  t.t_dwell = json_io::number_or(j, "t_dwell", t.t_dwell, path);
  t.v_low = json_io::number_or(j, "v_low", t.v_low, path);
  t.ramp_rate = json_io::number_or(j, "ramp_rate", t.ramp_rate, path);
  t.alpha_default =
      json_io::number_or(j, "alpha_default", t.alpha_default, path);
  t.validate();
  return t;
}

nlohmann::json to_json(const FsmThresholds& t) {
  return {{"d_activate", t.d_activate}, {"d_grasp", t.d_grasp},
          {"t_dwell", t.t_dwell},       {"v_low", t.v_low},
          {"ramp_rate", t.ramp_rate},   {"alpha_default", t.alpha_default}};
}

std::pair<GripperFsm, GripperCommand> step_fsm(const GripperFsm& fsm,
                                               const FsmObservation& obs,
                                               double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorCode::kInvalidArgument, "dt must be > 0", "step_fsm");
  }
  GripperFsm next = fsm;
  const FsmThresholds& th = fsm.thresholds;
  if (fsm.phase == GripperPhase::kDone) return {next, GripperCommand::kNone};

  const bool hand_still = obs.hand_speed < th.v_low;
  const bool near = all_below(obs.pair_distances, th.d_activate);

  if (!hand_still || !near) {
    next.phase = GripperPhase::kTracking;
    next.alpha = th.alpha_default;
    next.dwell_clock = 0.0;
    return {next, fsm.phase == GripperPhase::kTracking
                      ? GripperCommand::kNone
                      : GripperCommand::kOpenFingers};
  }

  switch (fsm.phase) {
    case GripperPhase::kTracking:
      next.phase = GripperPhase::kFinalApproach;
      next.dwell_clock = 0.0;
      return {next, GripperCommand::kNone};

    case GripperPhase::kFinalApproach:
      next.alpha = std::max(0.0, fsm.alpha - th.ramp_rate * dt);
      if (all_below(obs.pair_distances, th.d_grasp)) {
        next.dwell_clock = fsm.dwell_clock + dt;
      } else {
        next.dwell_clock = 0.0;
      }
      if (next.dwell_clock + kDwellEpsilon >= th.t_dwell) {
        next.phase = GripperPhase::kGrasping;
        return {next, GripperCommand::kCloseFingers};
      }
      return {next, GripperCommand::kNone};

    case GripperPhase::kGrasping:
      if (obs.fingers_closed) next.phase = GripperPhase::kDone;
      return {next, GripperCommand::kNone};

    case GripperPhase::kDone:
      break;
  }
  return {next, GripperCommand::kNone};
}

}  // namespace hvmc
