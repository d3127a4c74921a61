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

// Serial revolute chains: forward kinematics and translational point
// Jacobians for named attachment points.

#ifndef HVMC_KINEMATICS_HPP_
#define HVMC_KINEMATICS_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <json.hpp>

#include "hvmc/common.hpp"

namespace hvmc {

// Rigid transform. `orientation` is kept as a 3x3 rotation matrix.
struct Pose {
  Vec3 position = Vec3::Zero();
  Mat3 orientation = Mat3::Identity();

  static Pose Identity() { return {}; }
  static Pose FromRpy(const Vec3& xyz, const Vec3& rpy);

  Vec3 transform(const Vec3& local) const {
    return position + orientation * local;
  }
  Pose operator*(const Pose& rhs) const {
    return {position + orientation * rhs.position,
            orientation * rhs.orientation};
  }
  Pose inverse() const {
    Mat3 rt = orientation.transpose();
    return {-(rt * position), rt};
  }
};

// URDF convention: R = Rz(yaw) * Ry(pitch) * Rx(roll).
Mat3 rpy_to_matrix(const Vec3& rpy);

bool is_proper_rotation(const Mat3& r, double tol = 1e-9);

// Inverse of rpy_to_matrix; roll absorbs yaw at the pitch singularity.
Vec3 matrix_to_rpy(const Mat3& r);

// {"xyz": [..], "rpy": [..]}, both optional.
Pose pose_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json to_json(const Pose& p);

struct JointLimits {
  double lower = 0.0;
  double upper = 0.0;
};

struct JointSpec {
  std::string name;
  Vec3 axis = Vec3::UnitZ();       // unit, in the joint frame
  Pose origin;                     // parent body -> joint frame at q = 0
  std::optional<JointLimits> limits;
};

// A named point fixed on a body. Body 0 is the chain base; body k is the
// link moved by joint k (1-based).
struct Attachment {
  std::string name;
  int body = 0;
  Vec3 offset = Vec3::Zero();
  Mat3 orientation = Mat3::Identity();
};

struct JointState {
  Eigen::VectorXd q;
  Eigen::VectorXd qdot;

  static JointState Zero(int n) {
    return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  }
};

using PointJacobian = Eigen::Matrix<double, 3, Eigen::Dynamic>;

class KinematicChain {
 public:
  // Validates and normalises joint axes. Throws Error on zero-norm axes,
  // inverted limits, bad body indices or duplicate attachment names.
  KinematicChain(std::string name, Pose base, std::vector<JointSpec> joints,
                 std::vector<Attachment> attachments);

  const std::string& name() const { return name_; }
  int dof() const { return static_cast<int>(joints_.size()); }
  const Pose& base() const { return base_; }
  const std::vector<JointSpec>& joints() const { return joints_; }
  const std::vector<Attachment>& attachments() const { return attachments_; }

  bool has_attachment(std::string_view name) const;
  const Attachment& attachment(std::string_view name) const;

  KinematicChain with_attachment(Attachment a) const;
  KinematicChain without_attachment(std::string_view name) const;

  // New attachment on the same body as `base_name`, displaced by
  // `local_link` expressed in the base attachment's frame.
  KinematicChain with_rigid_link(std::string_view base_name,
                                 std::string new_name,
                                 const Vec3& local_link) const;

  void check_state(const JointState& s) const;

 private:
  std::string name_;
  Pose base_;
  std::vector<JointSpec> joints_;
  std::vector<Attachment> attachments_;
};

KinematicChain load_chain(std::string_view json_text);
KinematicChain load_chain_file(const std::filesystem::path& path);

// World poses of bodies 0..dof and the world joint axes/origins after one
// forward pass. Reused by the control loop to evaluate several points.
class ChainFrames {
 public:
  ChainFrames(const KinematicChain& chain, const Eigen::VectorXd& q);

  const Pose& body(int index) const { return bodies_[index]; }
  int dof() const { return static_cast<int>(axes_.size()); }

  Pose attachment_pose(std::string_view name) const;
  Vec3 position(std::string_view name) const;
  PointJacobian jacobian(std::string_view name) const;

  // Jacobian of an arbitrary world point rigidly attached to `body`.
  PointJacobian body_point_jacobian(int body, const Vec3& world_point) const;

 private:
  const KinematicChain* chain_;
  std::vector<Pose> bodies_;
  std::vector<Vec3> axes_;
  std::vector<Vec3> origins_;
};

Vec3 point_position(const KinematicChain& chain, const JointState& state,
                    std::string_view attachment);

PointJacobian point_jacobian(const KinematicChain& chain,
                             const JointState& state,
                             std::string_view attachment);

}  // namespace hvmc

#endif  // HVMC_KINEMATICS_HPP_
