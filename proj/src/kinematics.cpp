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

#include "hvmc/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>
#include <utility>

#include "hvmc/json_io.hpp"

namespace hvmc {

Mat3 rpy_to_matrix(const Vec3& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
      .toRotationMatrix();
}

Pose Pose::FromRpy(const Vec3& xyz, const Vec3& rpy) {
  return {xyz, rpy_to_matrix(rpy)};
}

bool is_proper_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  if (((r.transpose() * r) - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) {
    return false;
  }
  return std::abs(r.determinant() - 1.0) <= tol;
}

KinematicChain::KinematicChain(std::string name, Pose base,
                               std::vector<JointSpec> joints,
                               std::vector<Attachment> attachments)
    : name_(std::move(name)),
      base_(std::move(base)),
      joints_(std::move(joints)),
      attachments_(std::move(attachments)) {
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    JointSpec& j = joints_[i];
    const std::string where = "joints[" + std::to_string(i) + "]";
    if (!j.axis.allFinite() || j.axis.norm() < 1e-12) {
      throw Error(ErrorCode::kInvalidArgument, "zero-norm axis", where);
    }
    j.axis.normalize();
    if (!is_proper_rotation(j.origin.orientation)) {
      throw Error(ErrorCode::kInvalidArgument, "origin is not a rotation",
                  where);
    }
    if (j.limits && !(j.limits->lower < j.limits->upper)) {
      throw Error(ErrorCode::kInvalidArgument, "limits require lower < upper",
                  where);
    }
  }
  std::unordered_set<std::string> names;
  for (const Attachment& a : attachments_) {
    if (a.body < 0 || a.body > dof()) {
      throw Error(ErrorCode::kInvalidArgument, "body index out of range",
                  "attachment " + a.name);
    }
    if (!names.insert(a.name).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate attachment name",
                  "attachment " + a.name);
    }
  }
}

bool KinematicChain::has_attachment(std::string_view name) const {
  return std::any_of(attachments_.begin(), attachments_.end(),
                     [&](const Attachment& a) { return a.name == name; });
}

const Attachment& KinematicChain::attachment(std::string_view name) const {
  for (const Attachment& a : attachments_) {
    if (a.name == name) return a;
  }
  throw Error(ErrorCode::kNotFound, "unknown attachment",
              std::string(name));
}

KinematicChain KinematicChain::with_attachment(Attachment a) const {
  std::vector<Attachment> next = attachments_;
  next.push_back(std::move(a));
  return KinematicChain(name_, base_, joints_, std::move(next));
}

KinematicChain KinematicChain::without_attachment(std::string_view name) const {
  std::vector<Attachment> next;
  for (const Attachment& a : attachments_) {
    if (a.name != name) next.push_back(a);
  }
  if (next.size() == attachments_.size()) {
    throw Error(ErrorCode::kNotFound, "unknown attachment", std::string(name));
  }
  return KinematicChain(name_, base_, joints_, std::move(next));
}

KinematicChain KinematicChain::with_rigid_link(std::string_view base_name,
                                               std::string new_name,
                                               const Vec3& local_link) const {
  const Attachment& base_att = attachment(base_name);
  Attachment a;
  a.name = std::move(new_name);
  a.body = base_att.body;
  a.offset = base_att.offset + base_att.orientation * local_link;
  a.orientation = base_att.orientation;
  return with_attachment(std::move(a));
}

void KinematicChain::check_state(const JointState& s) const {
  if (s.q.size() != dof() || s.qdot.size() != dof()) {
    throw Error(ErrorCode::kInvalidArgument,
                "joint state size " + std::to_string(s.q.size()) +
                    " does not match chain dof " + std::to_string(dof()),
                name_);
  }
}

using json_io::json;

Vec3 matrix_to_rpy(const Mat3& r) {
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  if (std::abs(r(2, 0)) > 1.0 - 1e-12) {
    // Gimbal lock: fold yaw into roll.
    return Vec3(std::atan2(-r(1, 2), r(1, 1)), pitch, 0.0);
  }
  return Vec3(std::atan2(r(2, 1), r(2, 2)), pitch,
              std::atan2(r(1, 0), r(0, 0)));
}

Pose pose_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) json_io::fail(path, "expected {xyz, rpy}");
  return Pose::FromRpy(json_io::vec3_or(j, "xyz", Vec3::Zero(), path),
                       json_io::vec3_or(j, "rpy", Vec3::Zero(), path));
}

json to_json(const Pose& p) {
  return {{"xyz", json_io::to_json(p.position)},
          {"rpy", json_io::to_json(matrix_to_rpy(p.orientation))}};
}

namespace {

Pose parse_origin(const json& j, const std::string& path) {
  return pose_from_json(j, path);
}

Mat3 parse_orientation(const json& j, const std::string& path) {
  // Either [r, p, y] or {"rpy": [r, p, y]}.
  if (j.is_array()) return rpy_to_matrix(json_io::as_vec3(j, path));
  return rpy_to_matrix(json_io::vec3(j, "rpy", path));
}

}  // namespace

KinematicChain load_chain(std::string_view json_text) {
  const json root = json_io::parse_text(json_text, "chain");
  const std::string name =
      root.contains("name") ? json_io::string(root, "name", "") : "chain";
  Pose base = root.contains("base") ? parse_origin(root["base"], "base")
                                    : Pose::Identity();

  const json& joints_j = json_io::at(root, "joints", "");
  if (!joints_j.is_array()) json_io::fail("joints", "expected an array");
  std::vector<JointSpec> joints;
  for (std::size_t i = 0; i < joints_j.size(); ++i) {
    const json& jj = joints_j[i];
    const std::string path = "joints[" + std::to_string(i) + "]";
    JointSpec spec;
    spec.name = jj.contains("name") ? json_io::string(jj, "name", path)
                                    : "joint" + std::to_string(i + 1);
    spec.axis = json_io::vec3(jj, "axis", path);
    if (jj.contains("origin")) {
      spec.origin = parse_origin(jj["origin"], json_io::join(path, "origin"));
    }
    if (jj.contains("limits")) {
      const std::string lp = json_io::join(path, "limits");
      spec.limits = JointLimits{json_io::number(jj["limits"], "lower", lp),
                                json_io::number(jj["limits"], "upper", lp)};
    }
    joints.push_back(std::move(spec));
  }

  std::vector<Attachment> attachments;
  if (root.contains("attachments")) {
    const json& aj = root["attachments"];
    if (!aj.is_array()) json_io::fail("attachments", "expected an array");
    for (std::size_t i = 0; i < aj.size(); ++i) {
      const std::string path = "attachments[" + std::to_string(i) + "]";
      Attachment a;
      a.name = json_io::string(aj[i], "name", path);
      const double body = json_io::number(aj[i], "body", path);
      if (body != std::floor(body)) {
        json_io::fail(json_io::join(path, "body"), "expected an integer");
      }
      a.body = static_cast<int>(body);
      a.offset = json_io::vec3_or(aj[i], "offset", Vec3::Zero(), path);
      if (aj[i].contains("orientation")) {
        a.orientation = parse_orientation(aj[i]["orientation"],
                                          json_io::join(path, "orientation"));
      }
      attachments.push_back(std::move(a));
    }
  }
  return KinematicChain(name, std::move(base), std::move(joints),
                        std::move(attachments));
}

KinematicChain load_chain_file(const std::filesystem::path& path) {
  std::ifstream probe(path);
  if (!probe) {
    throw Error(ErrorCode::kNotFound, "cannot open chain file", path.string());
  }
  return load_chain(json_io::parse_file(path).dump());
}

ChainFrames::ChainFrames(const KinematicChain& chain, const Eigen::VectorXd& q)
    : chain_(&chain) {
  const int n = chain.dof();
  if (q.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "q size does not match chain",
                chain.name());
  }
  bodies_.reserve(n + 1);
  axes_.reserve(n);
  origins_.reserve(n);
  bodies_.push_back(chain.base());
  for (int k = 0; k < n; ++k) {
    const JointSpec& j = chain.joints()[k];
    const Pose joint_frame = bodies_.back() * j.origin;
    axes_.push_back(joint_frame.orientation * j.axis);
    origins_.push_back(joint_frame.position);
    Pose rotated = joint_frame;
    rotated.orientation =
        joint_frame.orientation *
        Eigen::AngleAxisd(q[k], j.axis).toRotationMatrix();
    bodies_.push_back(rotated);
  }
}

Pose ChainFrames::attachment_pose(std::string_view name) const {
  const Attachment& a = chain_->attachment(name);
  return bodies_[a.body] * Pose{a.offset, a.orientation};
}

Vec3 ChainFrames::position(std::string_view name) const {
  const Attachment& a = chain_->attachment(name);
  return bodies_[a.body].transform(a.offset);
}

PointJacobian ChainFrames::body_point_jacobian(int body,
                                               const Vec3& world_point) const {
  PointJacobian jac = PointJacobian::Zero(3, dof());
  // Joint k (0-based) moves bodies k+1..n.
  for (int k = 0; k < body; ++k) {
    jac.col(k) = axes_[k].cross(world_point - origins_[k]);
  }
  return jac;
}

PointJacobian ChainFrames::jacobian(std::string_view name) const {
  const Attachment& a = chain_->attachment(name);
  return body_point_jacobian(a.body, bodies_[a.body].transform(a.offset));
}

Vec3 point_position(const KinematicChain& chain, const JointState& state,
                    std::string_view attachment) {
  return ChainFrames(chain, state.q).position(attachment);
}

PointJacobian point_jacobian(const KinematicChain& chain,
                             const JointState& state,
                             std::string_view attachment) {
  return ChainFrames(chain, state.q).jacobian(attachment);
}

}  // namespace hvmc
