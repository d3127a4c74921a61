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

// Object catalog, scripted hand trajectories and the two experiment
// generators, plus `execute`, which runs one script to an outcome.

#ifndef HVMC_SCENARIO_HPP_
#define HVMC_SCENARIO_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hvmc/config_bundle.hpp"
#include "hvmc/metrics.hpp"
#include "hvmc/plant_sim.hpp"

namespace hvmc {

inline constexpr std::array<std::string_view, 4> kObjectNames = {
    "cardboard_box", "banana", "spoon", "plastic_cup"};

// Finger contact points and approach direction in the object frame. The
// wrist-back target follows from the rigid-link length of the controller.
struct ObjectSpec {
  std::string name;
  Vec3 left = Vec3::Zero();
  Vec3 right = Vec3::Zero();
  Vec3 approach = -Vec3::UnitZ();
  Pose in_hand;  // object frame in the palm frame

  GraspSpec grasp(double link_length) const;
};

// {"name", "grasp": {"left", "right", "approach"}, "in_hand": {"xyz", "rpy"}}
ObjectSpec object_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json to_json(const ObjectSpec& o);
// A catalog name resolves to <data>/objects/<name>.json; anything else is
// read as a path.
ObjectSpec load_object(const std::string& name_or_path);

enum class Trigger { kAfterRobotStart, kAfterFinalApproach };
enum class SegmentKind { kHold, kTranslate, kRotate };

std::string_view to_string(Trigger t);
std::string_view to_string(SegmentKind k);

struct MotionSegment {
  SegmentKind kind = SegmentKind::kHold;
  Trigger trigger = Trigger::kAfterRobotStart;
  double start = 0.0;     // s after the trigger
  double duration = 1.0;  // s
  Vec3 vector = Vec3::Zero();  // translation (m) or rotation axis (unit)
  double angle = 0.0;          // rad, rotations only
  Vec3 pivot = Vec3::Zero();   // rotation center in the palm frame
};

// Minimum-jerk progress 10s^3 - 15s^4 + 6s^5 on s clamped to [0, 1].
double min_jerk(double s);

// Palm pose over time. Segments apply in order on top of `initial`;
// translations shift the palm, rotations turn it around a world axis through
// the segment's pivot (fixed to the palm as it was before the segment). A
// segment whose trigger has not fired yet contributes nothing.
class HandTrajectory : public HandPoseSource {
 public:
  HandTrajectory(Pose initial, std::vector<MotionSegment> segments);

  Pose pose_at(double t, const SessionEvents& events) const override;
  // Pose with every segment completed.
  Pose final_pose() const;

  const Pose& initial() const { return initial_; }
  const std::vector<MotionSegment>& segments() const { return segments_; }

 private:
  Pose initial_;
  std::vector<MotionSegment> segments_;
};

struct ScenarioScript {
  std::string id;
  ObjectSpec object;
  JointState robot_start;
  Pose hand_start;
  std::vector<MotionSegment> segments;
  std::uint64_t seed = 0;
  std::string motion;      // "static", "translation", "rotation", "random"
  bool below_hand = false;

  // Segments sharing a trigger are time-ordered and do not overlap;
  // durations are positive; rotation axes are unit.
  void validate(int dof) const;
  HandTrajectory trajectory() const;
};

// Missing "robot_start" / "hand_start" fall back to the scene's robot_home
// and hand_nominal; "object" is a catalog name, a path or an inline object.
nlohmann::json to_json(const ScenarioScript& s);
ScenarioScript script_from_json(const nlohmann::json& j,
                                const ConfigBundle& config);
ScenarioScript load_script(const std::filesystem::path& path,
                           const ConfigBundle& config);

// Uniform double in [0, 1) from the top 53 bits; identical on every
// platform, unlike std::uniform_real_distribution.
double uniform01(std::mt19937_64& rng);
double uniform(std::mt19937_64& rng, double lo, double hi);
Vec3 unit_vector(std::mt19937_64& rng);

enum class Motion { kTranslation, kRotation };
std::string_view to_string(Motion m);
Motion parse_motion(std::string_view s);

// Fixed robot start, one random motion starting motion_start after the
// robot starts. Motions that would leave the scene's workspace bounds are
// redrawn.
std::vector<ScenarioScript> generate_experiment1(std::uint64_t seed,
                                                 const ObjectSpec& object,
                                                 Motion motion, int n,
                                                 const ConfigBundle& config);

// Random robot starts at 0.4-0.9 m from the object (a share of them with
// the gripper below the palm), one random translation after the robot
// starts and one after the final approach begins. Box only.
std::vector<ScenarioScript> generate_experiment2(std::uint64_t seed, int n,
                                                 const ConfigBundle& config);

SessionSetup make_session_setup(const ConfigBundle& config,
                                const ObjectSpec& object,
                                const JointState& start);

struct RunOutcome {
  std::string id;
  bool success = false;
  std::string failure_reason;  // "", "timeout", "grasp_error", "system"
  std::string detail;
  RunMetrics metrics;
  TrajectoryLog log;
  // Smallest distance from either finger point to the raw palm position.
  double min_finger_hand_distance = 0.0;
};

struct Judgement {
  bool success = false;
  std::string failure_reason;  // "", "timeout", "grasp_error"
  std::string detail;
};

// Geometric grasp test at closure: both finger points within
// scene.success_distance of their targets and e_theta below
// scene.success_angle_deg. Logs that did not end in "done" time out.
Judgement judge_grasp(const TrajectoryLog& log, const RunMetrics& metrics,
                      const SceneParams& scene);

struct ExecuteOptions {
  int log_stride = 1;
  bool keep_log = true;
};

// Runs to finger closure or the scene timeout. Simulation errors become
// failure_reason "system" with the message in `detail`.
RunOutcome execute(const ScenarioScript& script, const ConfigBundle& config,
                   const ExecuteOptions& options = {});

}  // namespace hvmc

#endif  // HVMC_SCENARIO_HPP_
