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

#include "hvmc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>

#include <Eigen/Geometry>

#include "hvmc/json_io.hpp"

namespace hvmc {

using json_io::json;
namespace fs = std::filesystem;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr int kMaxDraws = 10000;

Pose apply_segment(const MotionSegment& seg, double s, Pose p) {
  switch (seg.kind) {
    case SegmentKind::kHold:
      break;
    case SegmentKind::kTranslate:
      p.position += s * seg.vector;
      break;
    case SegmentKind::kRotate: {
      const Mat3 r =
          Eigen::AngleAxisd(s * seg.angle, seg.vector).toRotationMatrix();
      const Vec3 center = p.transform(seg.pivot);
      p.position = center + r * (p.position - center);
      p.orientation = r * p.orientation;
      break;
    }
  }
  return p;
}

Trigger parse_trigger(const std::string& s, const std::string& path) {
  if (s == "after_robot_start") return Trigger::kAfterRobotStart;
  if (s == "after_final_approach") return Trigger::kAfterFinalApproach;
  json_io::fail(path, "unknown trigger '" + s + "'");
}

SegmentKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "hold") return SegmentKind::kHold;
  if (s == "translate") return SegmentKind::kTranslate;
  if (s == "rotate") return SegmentKind::kRotate;
  json_io::fail(path, "unknown segment kind '" + s + "'");
}

std::string run_id(const std::string& prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", i);
  return prefix + "-" + buf;
}

// Grasp midpoint and approach direction in the world for a palm pose.
struct GraspGeometry {
  Vec3 midpoint;
  Vec3 approach;
};

GraspGeometry grasp_geometry(const ObjectSpec& o, const Pose& hand) {
  const Pose obj = hand * o.in_hand;
  return {obj.transform(0.5 * (o.left + o.right)),
          obj.orientation * o.approach.normalized()};
}

bool inside_workspace(const ObjectSpec& o, const Pose& hand,
                      const SceneParams& scene) {
  const GraspGeometry g = grasp_geometry(o, hand);
  if ((g.midpoint.array() < scene.workspace_min.array()).any() ||
      (g.midpoint.array() > scene.workspace_max.array()).any()) {
    return false;
  }
  const double tilt =
      std::acos(std::clamp(-g.approach.z(), -1.0, 1.0)) / kDegToRad;
  return tilt <= scene.max_approach_tilt_deg;
}

MotionSegment draw_motion(std::mt19937_64& rng, Motion motion,
                          const SceneParams& scene) {
  MotionSegment seg;
  seg.trigger = Trigger::kAfterRobotStart;
  seg.start = scene.motion_start;
  seg.duration = scene.motion_duration;
  if (motion == Motion::kTranslation) {
    seg.kind = SegmentKind::kTranslate;
    seg.vector = unit_vector(rng) *
                 uniform(rng, scene.translation_min, scene.translation_max);
  } else {
    seg.kind = SegmentKind::kRotate;
    seg.vector = unit_vector(rng);
    seg.angle = uniform(rng, scene.rotation_min_deg, scene.rotation_max_deg) *
                kDegToRad;
    seg.pivot = scene.rotation_pivot;
  }
  return seg;
}

}  // namespace

GraspSpec ObjectSpec::grasp(double link_length) const {
  return GraspSpec::FromFingers(left, right, approach, link_length);
}

ObjectSpec object_from_json(const json& j, const std::string& path) {
  ObjectSpec o;
  o.name = json_io::string(j, "name", path);
  const json& g = json_io::at(j, "grasp", path);
  const std::string gp = json_io::join(path, "grasp");
  o.left = json_io::vec3(g, "left", gp);
  o.right = json_io::vec3(g, "right", gp);
  o.approach = json_io::vec3_or(g, "approach", o.approach, gp);
  if (o.approach.norm() < 1e-9) {
    json_io::fail(json_io::join(gp, "approach"), "zero approach direction");
  }
  o.approach.normalize();
  if (j.contains("in_hand")) {
    o.in_hand = pose_from_json(j["in_hand"], json_io::join(path, "in_hand"));
  }
  // Rejects collinear target triangles.
  (void)o.grasp(0.45);
  return o;
}

json to_json(const ObjectSpec& o) {
  return {{"name", o.name},
          {"grasp",
           {{"left", json_io::to_json(o.left)},
            {"right", json_io::to_json(o.right)},
            {"approach", json_io::to_json(o.approach)}}},
          {"in_hand", to_json(o.in_hand)}};
}

ObjectSpec load_object(const std::string& name_or_path) {
  const bool catalog =
      std::find(kObjectNames.begin(), kObjectNames.end(), name_or_path) !=
      kObjectNames.end();
  const fs::path path = catalog
                            ? data_dir() / "objects" / (name_or_path + ".json")
                            : fs::path(name_or_path);
  return object_from_json(json_io::parse_file(path), "object");
}

std::string_view to_string(Trigger t) {
  return t == Trigger::kAfterRobotStart ? "after_robot_start"
                                        : "after_final_approach";
}

std::string_view to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::kHold:
      return "hold";
    case SegmentKind::kTranslate:
      return "translate";
    case SegmentKind::kRotate:
      return "rotate";
  }
  return "hold";
}

double min_jerk(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

HandTrajectory::HandTrajectory(Pose initial, std::vector<MotionSegment> segments)
    : initial_(std::move(initial)), segments_(std::move(segments)) {}

Pose HandTrajectory::pose_at(double t, const SessionEvents& events) const {
  Pose p = initial_;
  for (const MotionSegment& seg : segments_) {
    double t0 = seg.start;
    if (seg.trigger == Trigger::kAfterFinalApproach) {
      if (!events.final_approach_time) continue;
      t0 += *events.final_approach_time;
    }
    const double s = min_jerk((t - t0) / seg.duration);
    if (s > 0.0) p = apply_segment(seg, s, p);
  }
  return p;
}

Pose HandTrajectory::final_pose() const {
  Pose p = initial_;
  for (const MotionSegment& seg : segments_) p = apply_segment(seg, 1.0, p);
  return p;
}

void ScenarioScript::validate(int dof) const {
  if (robot_start.q.size() != dof || robot_start.qdot.size() != dof) {
    throw Error(ErrorCode::kInvalidArgument, "wrong joint count",
                "scenario.robot_start");
  }
  if (!is_proper_rotation(hand_start.orientation) ||
      !hand_start.position.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "invalid pose",
                "scenario.hand_start");
  }
  std::map<Trigger, double> last_end;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const MotionSegment& s = segments[i];
    const std::string where = "scenario.segments[" + std::to_string(i) + "]";
    if (!(s.duration > 0.0) || !std::isfinite(s.duration) ||
        !(s.start >= 0.0) || !s.vector.allFinite() ||
        !std::isfinite(s.angle) || !s.pivot.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument, "bad timing or magnitude",
                  where);
    }
    if (s.kind == SegmentKind::kRotate &&
        std::abs(s.vector.norm() - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidArgument, "rotation axis must be unit",
                  where);
    }
    auto it = last_end.find(s.trigger);
    if (it != last_end.end() && s.start < it->second - 1e-12) {
      throw Error(ErrorCode::kInvalidArgument,
                  "segments overlap or are out of order", where);
    }
    last_end[s.trigger] = s.start + s.duration;
  }
}

HandTrajectory ScenarioScript::trajectory() const {
  return HandTrajectory(hand_start, segments);
}

json to_json(const ScenarioScript& s) {
  json segs = json::array();
  for (const MotionSegment& m : s.segments) {
    json sj = {{"kind", to_string(m.kind)},
               {"trigger", to_string(m.trigger)},
               {"start", m.start},
               {"duration", m.duration},
               {"vector", json_io::to_json(m.vector)}};
    if (m.kind == SegmentKind::kRotate) {
      sj["angle"] = m.angle;
      sj["pivot"] = json_io::to_json(m.pivot);
    }
    segs.push_back(std::move(sj));
  }
  return {{"id", s.id},
          {"object", to_json(s.object)},
          {"robot_start",
           std::vector<double>(s.robot_start.q.data(),
                               s.robot_start.q.data() + s.robot_start.q.size())},
          {"hand_start", to_json(s.hand_start)},
          {"segments", segs},
          {"seed", s.seed},
          {"motion", s.motion},
          {"below_hand", s.below_hand}};
}

ScenarioScript script_from_json(const json& j, const ConfigBundle& config) {
  if (!j.is_object()) json_io::fail("scenario", "expected an object");
  ScenarioScript s;
  s.id = j.contains("id") ? json_io::string(j, "id", "scenario") : "run";
  const json& obj = json_io::at(j, "object", "scenario");
  s.object = obj.is_string() ? load_object(obj.get<std::string>())
                             : object_from_json(obj, "scenario.object");
  const int dof = config.chain.dof();
  s.robot_start = JointState::Zero(dof);
  if (j.contains("robot_start")) {
    const json& q = j["robot_start"];
    if (!q.is_array() || static_cast<int>(q.size()) != dof) {
      json_io::fail("scenario.robot_start",
                    "expected " + std::to_string(dof) + " joint angles");
    }
    for (int k = 0; k < dof; ++k) {
      s.robot_start.q[k] = json_io::as_number(q[k], "scenario.robot_start");
    }
  } else {
    s.robot_start.q = config.scene.robot_home;
  }
  s.hand_start = j.contains("hand_start")
                     ? pose_from_json(j["hand_start"], "scenario.hand_start")
                     : config.scene.hand_nominal;
  if (j.contains("segments")) {
    const json& segs = j["segments"];
    if (!segs.is_array()) json_io::fail("scenario.segments", "expected array");
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const std::string p = "scenario.segments[" + std::to_string(i) + "]";
      const json& sj = segs[i];
      MotionSegment m;
      m.kind = parse_kind(json_io::string(sj, "kind", p), p + ".kind");
      if (sj.contains("trigger")) {
        m.trigger =
            parse_trigger(json_io::string(sj, "trigger", p), p + ".trigger");
      }
      m.start = json_io::number_or(sj, "start", 0.0, p);
      m.duration = json_io::number_or(sj, "duration", 1.0, p);
      m.vector = json_io::vec3_or(sj, "vector", Vec3::Zero(), p);
      m.angle = json_io::number_or(sj, "angle", 0.0, p);
      m.pivot = json_io::vec3_or(sj, "pivot", Vec3::Zero(), p);
      if (m.kind == SegmentKind::kRotate) {
        if (m.vector.norm() < 1e-9) {
          json_io::fail(p + ".vector", "zero rotation axis");
        }
        m.vector.normalize();
      }
      s.segments.push_back(m);
    }
  }
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  s.motion = j.contains("motion") ? json_io::string(j, "motion", "scenario")
                                  : "scripted";
  s.below_hand = j.value("below_hand", false);
  s.validate(dof);
  return s;
}

ScenarioScript load_script(const fs::path& path, const ConfigBundle& config) {
  return script_from_json(json_io::parse_file(path), config);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

Vec3 unit_vector(std::mt19937_64& rng) {
  // Marsaglia: uniform on the sphere from two uniforms in the unit disc.
  for (;;) {
    const double a = uniform(rng, -1.0, 1.0);
    const double b = uniform(rng, -1.0, 1.0);
    const double s = a * a + b * b;
    if (s >= 1.0 || s < 1e-12) continue;
    const double r = 2.0 * std::sqrt(1.0 - s);
    return Vec3(a * r, b * r, 1.0 - 2.0 * s);
  }
}

std::string_view to_string(Motion m) {
  return m == Motion::kTranslation ? "translation" : "rotation";
}

Motion parse_motion(std::string_view s) {
  if (s == "translation") return Motion::kTranslation;
  if (s == "rotation") return Motion::kRotation;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown motion '" + std::string(s) + "'", "motion");
}

std::vector<ScenarioScript> generate_experiment1(std::uint64_t seed,
                                                 const ObjectSpec& object,
                                                 Motion motion, int n,
                                                 const ConfigBundle& config) {
  if (n < 1) {
    throw Error(ErrorCode::kInvalidArgument, "must be >= 1", "runs");
  }
  const SceneParams& scene = config.scene;
  std::mt19937_64 rng(seed);
  std::vector<ScenarioScript> out;
  for (int i = 0; i < n; ++i) {
    ScenarioScript s;
    s.id = run_id("exp1-" + object.name + "-" + std::string(to_string(motion)),
                  i);
    s.object = object;
    s.robot_start = JointState::Zero(config.chain.dof());
    s.robot_start.q = scene.robot_home;
    s.hand_start = scene.hand_nominal;
    s.seed = seed;
    s.motion = std::string(to_string(motion));
    int draws = 0;
    for (;; ++draws) {
      if (draws == kMaxDraws) {
        throw Error(ErrorCode::kInvalidArgument,
                    "no motion inside the workspace bounds", "scene");
      }
      const MotionSegment seg = draw_motion(rng, motion, scene);
      const HandTrajectory traj(s.hand_start, {seg});
      if (inside_workspace(object, traj.final_pose(), scene)) {
        s.segments = {seg};
        break;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ScenarioScript> generate_experiment2(std::uint64_t seed, int n,
                                                 const ConfigBundle& config) {
  if (n < 1) {
    throw Error(ErrorCode::kInvalidArgument, "must be >= 1", "runs");
  }
  const SceneParams& scene = config.scene;
  const ObjectSpec object = load_object("cardboard_box");
  const KinematicChain& chain = config.chain;
  const int dof = chain.dof();
  const Vec3 midpoint = grasp_geometry(object, scene.hand_nominal).midpoint;
  const double palm_z = scene.hand_nominal.position.z();
  std::mt19937_64 rng(seed);
  std::vector<ScenarioScript> out;
  for (int i = 0; i < n; ++i) {
    // Spread the forced below-hand runs evenly through the list.
    const bool force_below =
        std::floor((i + 1) * scene.below_hand_fraction) >
        std::floor(i * scene.below_hand_fraction);
    ScenarioScript s;
    s.id = run_id("exp2-cardboard_box", i);
    s.object = object;
    s.hand_start = scene.hand_nominal;
    s.seed = seed;
    s.motion = "random";

    JointState start = JointState::Zero(dof);
    bool found = false;
    for (int draw = 0; draw < kMaxDraws && !found; ++draw) {
      for (int k = 0; k < dof; ++k) {
        double q = scene.robot_home[k] +
                   uniform(rng, -scene.start_spread, scene.start_spread);
        if (const auto& lim = chain.joints()[k].limits) {
          q = std::clamp(q, lim->lower, lim->upper);
        }
        start.q[k] = q;
      }
      const Vec3 tcp = point_position(chain, start, "tcp");
      const double d = (tcp - midpoint).norm();
      if (d < scene.start_distance_min || d > scene.start_distance_max) {
        continue;
      }
      const bool below = tcp.z() < palm_z - scene.below_hand_margin;
      if (force_below && !below) continue;
      s.below_hand = below;
      found = true;
    }
    if (!found) {
      throw Error(ErrorCode::kInvalidArgument,
                  "start sampling exhausted " + std::to_string(kMaxDraws) +
                      " attempts",
                  "generate_experiment2");
    }
    s.robot_start = start;

    bool placed = false;
    for (int draw = 0; draw < kMaxDraws && !placed; ++draw) {
      MotionSegment first = draw_motion(rng, Motion::kTranslation, scene);
      MotionSegment second;
      second.kind = SegmentKind::kTranslate;
      second.trigger = Trigger::kAfterFinalApproach;
      second.start = scene.displacement_delay;
      second.duration = scene.motion_duration;
      second.vector =
          unit_vector(rng) *
          uniform(rng, scene.displacement_min, scene.displacement_max);
      const HandTrajectory mid(s.hand_start, {first});
      const HandTrajectory full(s.hand_start, {first, second});
      if (inside_workspace(object, mid.final_pose(), scene) &&
          inside_workspace(object, full.final_pose(), scene)) {
        s.segments = {first, second};
        placed = true;
      }
    }
    if (!placed) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no motion inside the workspace bounds", "scene");
    }
    out.push_back(std::move(s));
  }
  return out;
}

SessionSetup make_session_setup(const ConfigBundle& config,
                                const ObjectSpec& object,
                                const JointState& start) {
  ControllerConfig controller = config.controller;
  controller.grasp = object.grasp(config.controller.grasp.link_length);
  controller.object_in_hand = object.in_hand;
  JointState s = start;
  if (s.qdot.size() != s.q.size()) s.qdot = Eigen::VectorXd::Zero(s.q.size());
  return SessionSetup{config.chain, controller, config.fsm, config.filters,
                      config.plant, s};
}

Judgement judge_grasp(const TrajectoryLog& log, const RunMetrics& metrics,
                      const SceneParams& scene) {
  Judgement j;
  if (log.records.empty() || log.end_reason != "done") {
    j.failure_reason = "timeout";
    return j;
  }
  const TickRecord& last = log.records.back();
  double finger_err = 0.0;
  for (int f = 0; f < 2; ++f) {
    finger_err = std::max(
        finger_err, (last.object_points[f] - last.gripper_points[f]).norm());
  }
  if (finger_err <= scene.success_distance &&
      metrics.e_theta < scene.success_angle_deg) {
    j.success = true;
  } else {
    j.failure_reason = "grasp_error";
    j.detail = "finger error " + format_fixed(finger_err * 100.0, 2) +
               " cm, angle error " + format_fixed(metrics.e_theta, 2) + " deg";
  }
  return j;
}

RunOutcome execute(const ScenarioScript& script, const ConfigBundle& config,
                   const ExecuteOptions& options) {
  RunOutcome o;
  o.id = script.id;
  try {
    script.validate(config.chain.dof());
    const SessionSetup setup =
        make_session_setup(config, script.object, script.robot_start);
    const HandTrajectory traj = script.trajectory();
    SessionOptions sopts;
    sopts.duration = config.scene.timeout;
    Session session(setup, traj.pose_at(0.0, SessionEvents{}), sopts);

    TrajectoryLog& log = o.log;
    log.config_hash = setup.config_hash();
    log.dt = setup.plant.dt;
    log.end_reason = "timeout";
    const long n_ticks = std::lround(config.scene.timeout / setup.plant.dt);
    double min_dist = std::numeric_limits<double>::infinity();
    bool done = false;
    for (long k = 0; k < n_ticks && !done; ++k) {
      const Pose raw = traj.pose_at(session.state().t, session.events());
      const TickRecord* rec = nullptr;
      try {
        rec = &session.tick(raw);
      } catch (const Error& e) {
        throw Error(e.code(), e.what(), "tick " + std::to_string(k));
      }
      for (int f = 0; f < 2; ++f) {
        min_dist = std::min(min_dist,
                            (rec->gripper_points[f] - raw.position).norm());
      }
      done = rec->phase == GripperPhase::kDone;
      log.records.push_back(*rec);
    }
    if (done) log.end_reason = "done";
    o.min_finger_hand_distance = min_dist;
    o.metrics = compute_metrics(log);

    const Judgement j = judge_grasp(log, o.metrics, config.scene);
    o.success = j.success;
    o.failure_reason = j.failure_reason;
    o.detail = j.detail;
    o.metrics.success = o.success;

    if (!options.keep_log) {
      log.records.clear();
      log.records.shrink_to_fit();
    } else if (options.log_stride > 1) {
      std::vector<TickRecord> kept;
      for (std::size_t k = 0; k < log.records.size(); ++k) {
        if (k % options.log_stride == 0 || k + 1 == log.records.size()) {
          kept.push_back(std::move(log.records[k]));
        }
      }
      log.records = std::move(kept);
    }
  } catch (const std::exception& e) {
    o.success = false;
    o.failure_reason = "system";
    o.detail = e.what();
    o.metrics.success = false;
  }
  return o;
}

}  // namespace hvmc
