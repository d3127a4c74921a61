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

#include "hvmc/plant_sim.hpp"

#include <algorithm>
#include <cmath>

#include "hvmc/json_io.hpp"

namespace hvmc {

using json_io::json;

PlantParams PlantParams::Default(const KinematicChain& chain) {
  PlantParams p;
  p.inertia = Eigen::VectorXd::Constant(chain.dof(), 1.0);
  p.friction = Eigen::VectorXd::Constant(chain.dof(), 2.0);
  p.dt = 0.001;
  for (const JointSpec& j : chain.joints()) p.limits.push_back(j.limits);
  return p;
}

void PlantParams::validate(int dof) const {
  if (inertia.size() != dof || friction.size() != dof ||
      static_cast<int>(limits.size()) != dof) {
    throw Error(ErrorCode::kInvalidArgument,
                "per-joint arrays must have " + std::to_string(dof) +
                    " entries",
                "plant");
  }
  if (!inertia.allFinite() || (inertia.array() <= 0.0).any()) {
    throw Error(ErrorCode::kInvalidArgument, "must be > 0", "plant.inertia");
  }
  if (!friction.allFinite() || (friction.array() < 0.0).any()) {
    throw Error(ErrorCode::kInvalidArgument, "must be >= 0", "plant.friction");
  }
  if (!(dt > 0.0 && dt <= 0.01)) {
    throw Error(ErrorCode::kInvalidArgument, "must be in (0, 0.01]",
                "plant.dt");
  }
}

PlantParams plant_params_from_json(const json& j, const KinematicChain& chain,
                                   const std::string& path) {
  PlantParams p = PlantParams::Default(chain);
  auto per_joint = [&](const char* key, Eigen::VectorXd& out) {
    if (!j.contains(key)) return;
    const std::string kp = json_io::join(path, key);
    const json& v = j[key];
    if (v.is_number()) {
      out.setConstant(json_io::as_number(v, kp));
    } else if (v.is_array() && static_cast<int>(v.size()) == chain.dof()) {
      for (int k = 0; k < chain.dof(); ++k) out[k] = json_io::as_number(v[k], kp);
    } else {
      json_io::fail(kp, "expected a number or " + std::to_string(chain.dof()) +
                            " numbers");
    }
  };
  per_joint("inertia", p.inertia);
  per_joint("friction", p.friction);
  p.dt = json_io::number_or(j, "dt", p.dt, path);
  p.validate(chain.dof());
  return p;
}

json to_json(const PlantParams& p) {
  return {{"inertia", std::vector<double>(p.inertia.data(),
                                          p.inertia.data() + p.inertia.size())},
          {"friction",
           std::vector<double>(p.friction.data(),
                               p.friction.data() + p.friction.size())},
          {"dt", p.dt}};
}

SimState step(const SimState& state, const Eigen::VectorXd& tau,
              const PlantParams& params) {
  const int n = static_cast<int>(params.inertia.size());
  if (tau.size() != n || state.joints.q.size() != n ||
      state.joints.qdot.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "size mismatch", "plant.step");
  }
  SimState next = state;
  for (int k = 0; k < n; ++k) {
    const double acc =
        (tau[k] - params.friction[k] * state.joints.qdot[k]) / params.inertia[k];
    double qd = state.joints.qdot[k] + acc * params.dt;
    double q = state.joints.q[k] + qd * params.dt;
    if (const auto& lim = params.limits[k]) {
      if (q < lim->lower) {
        q = lim->lower;
        qd = 0.0;
      } else if (q > lim->upper) {
        q = lim->upper;
        qd = 0.0;
      }
    }
    if (!std::isfinite(q) || !std::isfinite(qd)) {
      throw Error(ErrorCode::kNonFinite, "non-finite joint state",
                  "joint " + std::to_string(k));
    }
    next.joints.q[k] = q;
    next.joints.qdot[k] = qd;
  }
  next.t = state.t + params.dt;
  return next;
}

double kinetic_energy(const Eigen::VectorXd& qdot, const PlantParams& params) {
  return 0.5 * (params.inertia.array() * qdot.array().square()).sum();
}

double spring_energy(const std::array<PairedPointState, 3>& pairs,
                     const ControllerConfig& config) {
  double u = 0.0;
  for (const PairedPointState& s : pairs) {
    u += saturated_spring_potential(config.spring1, s.p);
    u += saturated_spring_potential(config.spring2, s.p);
  }
  return u;
}

std::string SessionSetup::config_hash() const {
  json j;
  j["chain"] = chain.name();
  json joints = json::array();
  for (const JointSpec& js : chain.joints()) {
    joints.push_back({json_io::to_json(js.axis),
                      json_io::to_json(js.origin.position)});
  }
  j["joints"] = joints;
  j["controller"] = to_json(controller);
  json grasp = json::array();
  for (const Vec3& p : controller.grasp.target_points) {
    grasp.push_back(json_io::to_json(p));
  }
  j["grasp"] = grasp;
  j["object_in_hand"] = json_io::to_json(controller.object_in_hand.position);
  j["fsm"] = to_json(fsm);
  j["filters"] = to_json(filters);
  j["plant"] = to_json(plant);
  j["start"] = std::vector<double>(start.q.data(), start.q.data() + start.q.size());
  return json_io::hex64(json_io::content_hash(j));
}

Session::Session(SessionSetup setup, const Pose& initial_hand,
                 SessionOptions options)
    : setup_(std::move(setup)),
      options_(options),
      linked_chain_(with_grasp_links(setup_.chain, setup_.controller.grasp)) {
  setup_.chain.check_state(setup_.start);
  setup_.controller.validate(setup_.chain.dof());
  setup_.fsm.validate();
  setup_.filters.validate();
  setup_.plant.validate(setup_.chain.dof());
  if (options_.log_stride < 1) options_.log_stride = 1;
  reset(initial_hand);
}

void Session::reset(const Pose& initial_hand) {
  state_ = SimState{};
  state_.joints = setup_.start;
  state_.hand_pose = initial_hand;
  state_.object_pose = initial_hand * setup_.controller.object_in_hand;
  fsm_ = GripperFsm::Initial(setup_.fsm);
  lowpass_ = LowPassState{setup_.filters.cutoff_hz, initial_hand};
  kalman_ = KalmanCvState::Initial(initial_hand.position, setup_.filters);
  offset_cache_ = OffsetDirectionCache{};
  events_ = SessionEvents{};
  closing_ = false;
  ticks_ = 0;
  last_ = TickRecord{};
}

void Session::set_profile(Profile profile) {
  setup_.controller = apply_profile(setup_.controller, profile);
}

const TickRecord& Session::tick(const Pose& raw_hand) {
  const double dt = setup_.plant.dt;
  const ControllerConfig& cfg = setup_.controller;

  auto [lp, filtered] = lowpass_update(lowpass_, raw_hand, dt);
  lowpass_ = lp;
  auto [kf, hand_velocity] = kalman_update(kalman_, raw_hand.position, dt);
  kalman_ = kf;
  state_.hand_pose = raw_hand;
  state_.object_pose = raw_hand * cfg.object_in_hand;

  const double alpha_used = fsm_.alpha;
  const ControllerOutput out =
      compute_torques(linked_chain_, state_.joints, filtered, hand_velocity,
                      alpha_used, cfg, offset_cache_);

  GripperCommand command = GripperCommand::kNone;
  if (options_.gripper_enabled) {
    const FsmObservation obs{out.pair_distances, hand_velocity.norm(),
                             state_.fingers_closed};
    auto [next_fsm, cmd] = step_fsm(fsm_, obs, dt);
    if (next_fsm.phase == GripperPhase::kFinalApproach &&
        fsm_.phase != GripperPhase::kFinalApproach &&
        !events_.final_approach_time) {
      events_.final_approach_time = state_.t;
    }
    fsm_ = next_fsm;
    command = cmd;
    if (cmd == GripperCommand::kCloseFingers) closing_ = true;
    if (cmd == GripperCommand::kOpenFingers) {
      closing_ = false;
      state_.finger_closure = 0.0;
      state_.fingers_closed = false;
    }
  }

  TickRecord& r = last_;
  r.t = state_.t;
  r.q = state_.joints.q;
  r.qdot = state_.joints.qdot;
  r.tau = out.tau;
  r.alpha = alpha_used;
  r.phase = fsm_.phase;
  r.command = command;
  r.fingers_closed = state_.fingers_closed;
  for (int i = 0; i < 3; ++i) {
    r.gripper_points[i] = out.pairs[i].gripper_point;
    r.target_points[i] = out.pairs[i].target_point;
    r.object_points[i] = out.grasp_points[i];
    r.pair_distances[i] = out.pair_distances[i];
    r.pair_forces[i].setZero();
  }
  r.repulsive_forces = {Vec3::Zero(), Vec3::Zero()};
  for (const ForceRecord& f : out.forces) {
    if (f.kind == ComponentKind::kRepulsive) {
      r.repulsive_forces[f.pair] += f.force;
    } else {
      r.pair_forces[f.pair] += f.force;
    }
  }
  r.hand_pose = filtered;
  r.hand_raw = raw_hand.position;
  r.hand_velocity = hand_velocity;
  r.region_centers = out.region_centers;
  r.kinetic_energy = kinetic_energy(state_.joints.qdot, setup_.plant);
  r.spring_energy = spring_energy(out.pairs, cfg);

  SimState next = step(state_, out.tau, setup_.plant);
  if (closing_ && !next.fingers_closed) {
    next.finger_closure = std::min(
        1.0, next.finger_closure + dt / options_.finger_close_time);
    next.fingers_closed = next.finger_closure >= 1.0 - 1e-9;
  }
  state_ = std::move(next);
  ++ticks_;
  return last_;
}

TrajectoryLog run_session(const SessionSetup& setup,
                          const HandPoseSource& hand,
                          const SessionOptions& options) {
  Session session(setup, hand.pose_at(0.0, SessionEvents{}), options);
  TrajectoryLog log;
  log.config_hash = setup.config_hash();
  log.dt = setup.plant.dt;
  log.end_reason = "duration";
  const long n_ticks =
      std::max(1L, std::lround(options.duration / setup.plant.dt));
  const int stride = std::max(1, options.log_stride);
  for (long k = 0; k < n_ticks; ++k) {
    const TickRecord* rec = nullptr;
    try {
      const Pose raw = hand.pose_at(session.state().t, session.events());
      rec = &session.tick(raw);
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), "tick " + std::to_string(k));
    }
    const bool done = options.stop_on_done &&
                      rec->phase == GripperPhase::kDone;
    if (k % stride == 0 || done || k + 1 == n_ticks) {
      log.records.push_back(*rec);
    }
    if (done) {
      log.end_reason = "done";
      break;
    }
  }
  return log;
}

}  // namespace hvmc
