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

// Gravity-compensated, torque-driven arm with diagonal joint inertia and
// viscous friction, plus the closed control loop that drives it.

#ifndef HVMC_PLANT_SIM_HPP_
#define HVMC_PLANT_SIM_HPP_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "hvmc/gripper_control.hpp"
#include "hvmc/hand_signal.hpp"
#include "hvmc/kinematics.hpp"
#include "hvmc/trajectory_log.hpp"
#include "hvmc/vmc_controller.hpp"

namespace hvmc {

struct PlantParams {
  Eigen::VectorXd inertia;   // kg m^2 per joint
  Eigen::VectorXd friction;  // N m s / rad per joint
  double dt = 0.001;
  std::vector<std::optional<JointLimits>> limits;

  // inertia 1.0, friction 2.0, dt 1 ms, limits from the chain.
  static PlantParams Default(const KinematicChain& chain);
  void validate(int dof) const;
};

// Reads {"inertia": x | [..], "friction": x | [..], "dt": x}; limits always
// come from the chain.
PlantParams plant_params_from_json(const nlohmann::json& j,
                                   const KinematicChain& chain,
                                   const std::string& path);
nlohmann::json to_json(const PlantParams& p);

struct SimState {
  double t = 0.0;
  JointState joints;
  Pose hand_pose;
  Pose object_pose;  // hand_pose * object_in_hand
  bool fingers_closed = false;
  double finger_closure = 0.0;  // 0 open .. 1 closed
};

// Semi-implicit Euler. A joint that crosses a limit is clamped to it and its
// velocity zeroed. Throws Error(kNonFinite) naming the offending joint.
SimState step(const SimState& state, const Eigen::VectorXd& tau,
              const PlantParams& params);

struct SessionEvents {
  std::optional<double> final_approach_time;  // first FINAL_APPROACH entry
};

class HandPoseSource {
 public:
  virtual ~HandPoseSource() = default;
  virtual Pose pose_at(double t, const SessionEvents& events) const = 0;
};

class StaticHandSource : public HandPoseSource {
 public:
  explicit StaticHandSource(Pose pose) : pose_(std::move(pose)) {}
  Pose pose_at(double, const SessionEvents&) const override { return pose_; }

 private:
  Pose pose_;
};

struct SessionSetup {
  KinematicChain chain;  // plain chain; paired links are added internally
  ControllerConfig controller;
  FsmThresholds fsm;
  FilterParams filters;
  PlantParams plant;
  JointState start;

  // Stable hash of every parameter that influences the run.
  std::string config_hash() const;
};

struct SessionOptions {
  double duration = 30.0;      // s of simulated time
  bool stop_on_done = true;
  bool gripper_enabled = true; // false freezes alpha and the FSM
  double finger_close_time = 0.3;
  int log_stride = 1;          // keep every n-th tick (first/last always)
};

// One closed-loop session advanced tick by tick. Per tick: filter the hand
// pose, place repulsive regions, build paired points with the current
// offset, compute torques, step the gripper FSM, step the plant.
class Session {
 public:
  Session(SessionSetup setup, const Pose& initial_hand,
          SessionOptions options = {});

  // Advances one tick with the given raw palm pose and returns its record.
  const TickRecord& tick(const Pose& raw_hand);

  void reset(const Pose& initial_hand);
  void set_profile(Profile profile);

  const SimState& state() const { return state_; }
  const GripperFsm& fsm() const { return fsm_; }
  const SessionEvents& events() const { return events_; }
  const ControllerConfig& controller() const { return setup_.controller; }
  const SessionSetup& setup() const { return setup_; }
  const TickRecord& last() const { return last_; }
  long ticks() const { return ticks_; }
  double dt() const { return setup_.plant.dt; }
  const KinematicChain& linked_chain() const { return linked_chain_; }

 private:
  SessionSetup setup_;
  SessionOptions options_;
  KinematicChain linked_chain_;
  SimState state_;
  GripperFsm fsm_;
  LowPassState lowpass_;
  KalmanCvState kalman_;
  OffsetDirectionCache offset_cache_;
  SessionEvents events_;
  bool closing_ = false;
  long ticks_ = 0;
  TickRecord last_;
};

// Runs until DONE (when stop_on_done), or `duration`. Errors from any
// component are rethrown with the tick index in `where`.
TrajectoryLog run_session(const SessionSetup& setup,
                          const HandPoseSource& hand,
                          const SessionOptions& options);

// Energy bookkeeping for passivity checks: 1/2 sum m_i qdot_i^2 and the
// summed spring potentials of the given paired points.
double kinetic_energy(const Eigen::VectorXd& qdot, const PlantParams& params);
double spring_energy(const std::array<PairedPointState, 3>& pairs,
                     const ControllerConfig& config);

}  // namespace hvmc

#endif  // HVMC_PLANT_SIM_HPP_
