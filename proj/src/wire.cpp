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

#include "hvmc/wire.hpp"

#include <array>

#include "hvmc/json_io.hpp"

namespace hvmc::wire {

using json_io::json;

namespace {

constexpr std::array<std::string_view, 6> kKindNames = {
    "state_update", "hand_pose_cmd", "profile_cmd",
    "lifecycle_cmd", "ack",          "error"};

json points(const std::array<Vec3, 3>& p) {
  return json::array({json_io::to_json(p[0]), json_io::to_json(p[1]),
                      json_io::to_json(p[2])});
}

json vector(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

std::string_view to_string(Kind k) {
  return kKindNames[static_cast<std::size_t>(k)];
}

Kind parse_kind(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<Kind>(i);
  }
  json_io::fail("kind", "unknown message kind '" + std::string(s) + "'");
}

bool is_command(Kind k) {
  return k == Kind::kHandPoseCmd || k == Kind::kProfileCmd ||
         k == Kind::kLifecycleCmd;
}

std::string encode(const Message& m) {
  json j = {{"v", kVersion},
            {"kind", to_string(m.kind)},
            {"session_id", m.session_id},
            {"seq", m.seq},
            {"payload", m.payload}};
  return j.dump();
}

Message decode(std::string_view text) {
  json j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded()) json_io::fail("message", "malformed JSON");
  if (!j.is_object()) json_io::fail("message", "expected an object");
  const json& v = json_io::at(j, "v", "");
  if (!v.is_number_integer() || v.get<int>() != kVersion) {
    json_io::fail("v", "unsupported version (expected " +
                           std::to_string(kVersion) + ")");
  }
  Message m;
  m.kind = parse_kind(json_io::string(j, "kind", ""));
  if (j.contains("session_id")) {
    if (!j["session_id"].is_string()) {
      json_io::fail("session_id", "expected a string");
    }
    m.session_id = j["session_id"].get<std::string>();
  }
  const json& seq = json_io::at(j, "seq", "");
  if (!seq.is_number_unsigned()) {
    json_io::fail("seq", "expected a non-negative integer");
  }
  m.seq = seq.get<std::uint64_t>();
  if (j.contains("payload")) {
    if (!j["payload"].is_object()) json_io::fail("payload", "expected an object");
    m.payload = j["payload"];
  }
  return m;
}

std::string_view to_string(Lifecycle a) {
  switch (a) {
    case Lifecycle::kStart:
      return "start";
    case Lifecycle::kPause:
      return "pause";
    case Lifecycle::kReset:
      return "reset";
  }
  return "start";
}

Pose hand_pose_from_payload(const json& payload) {
  return pose_from_json(payload, "payload");
}

Profile profile_from_payload(const json& payload) {
  return parse_profile(json_io::string(payload, "profile", "payload"));
}

Lifecycle lifecycle_from_payload(const json& payload) {
  const std::string a = json_io::string(payload, "action", "payload");
  if (a == "start") return Lifecycle::kStart;
  if (a == "pause") return Lifecycle::kPause;
  if (a == "reset") return Lifecycle::kReset;
  throw Error(ErrorCode::kInvalidArgument, "unknown action '" + a + "'",
              "payload.action");
}

json state_payload(const TickRecord& r, const StateContext& ctx) {
  json regions = json::array();
  for (const Vec3& c : r.region_centers) regions.push_back(json_io::to_json(c));
  return {{"t", r.t},
          {"q", vector(r.q)},
          {"qdot", vector(r.qdot)},
          {"alpha", r.alpha},
          {"phase", to_string(r.phase)},
          {"gripper_points", points(r.gripper_points)},
          {"target_points", points(r.target_points)},
          {"object_points", points(r.object_points)},
          {"pair_distances",
           {r.pair_distances[0], r.pair_distances[1], r.pair_distances[2]}},
          {"region_centers", regions},
          {"hand", to_json(r.hand_pose)},
          {"hand_raw", json_io::to_json(r.hand_raw)},
          {"command", to_string(ctx.last_command)},
          {"fingers_closed", r.fingers_closed},
          {"running", ctx.running},
          {"profile", to_string(ctx.profile)},
          {"spring2_f_max", ctx.spring2_f_max},
          {"role", ctx.role},
          {"dropped", ctx.dropped}};
}

json ack_payload(std::uint64_t ref_seq, Kind ref_kind, json details) {
  details["ref_seq"] = ref_seq;
  details["ref_kind"] = to_string(ref_kind);
  return details;
}

json error_payload(std::uint64_t ref_seq, std::string_view code,
                   std::string_view message) {
  return {{"ref_seq", ref_seq}, {"code", code}, {"message", message}};
}

}  // namespace hvmc::wire
