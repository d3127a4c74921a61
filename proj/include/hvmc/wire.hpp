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

// Live-session wire messages. One JSON object per WebSocket text frame:
//
//   {"v": 1, "kind": "...", "session_id": "...", "seq": 12, "payload": {...}}
//
// Payload schemas are documented in docs/wire_protocol.md.

#ifndef HVMC_WIRE_HPP_
#define HVMC_WIRE_HPP_

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "hvmc/kinematics.hpp"
#include "hvmc/trajectory_log.hpp"
#include "hvmc/vmc_controller.hpp"

namespace hvmc::wire {

inline constexpr int kVersion = 1;

enum class Kind {
  kStateUpdate,
  kHandPoseCmd,
  kProfileCmd,
  kLifecycleCmd,
  kAck,
  kError
};

std::string_view to_string(Kind k);
Kind parse_kind(std::string_view s);  // throws Error(kParse)

// Commands travel client to server; the rest server to client.
bool is_command(Kind k);

struct Message {
  Kind kind = Kind::kAck;
  std::string session_id;
  std::uint64_t seq = 0;
  nlohmann::json payload = nlohmann::json::object();
};

std::string encode(const Message& m);
// Throws Error(kParse) on malformed JSON, a wrong "v", an unknown kind or a
// missing field.
Message decode(std::string_view text);

enum class Lifecycle { kStart, kPause, kReset };
std::string_view to_string(Lifecycle a);

// Payload readers; throw Error(kParse / kInvalidArgument) naming the field.
// hand_pose_cmd: {"xyz": [x, y, z], "rpy": [r, p, y]}
Pose hand_pose_from_payload(const nlohmann::json& payload);
// profile_cmd: {"profile": "authoritative" | "cooperative"}
Profile profile_from_payload(const nlohmann::json& payload);
// lifecycle_cmd: {"action": "start" | "pause" | "reset"}
Lifecycle lifecycle_from_payload(const nlohmann::json& payload);

// Everything a state_update carries besides the tick record.
struct StateContext {
  bool running = false;
  Profile profile = Profile::kAuthoritative;
  double spring2_f_max = 0.0;
  GripperCommand last_command = GripperCommand::kNone;
  std::string role;             // "steering" or "observer"
  std::uint64_t dropped = 0;    // frames replaced before they were sent
};

nlohmann::json state_payload(const TickRecord& r, const StateContext& ctx);

nlohmann::json ack_payload(std::uint64_t ref_seq, Kind ref_kind,
                           nlohmann::json details = nlohmann::json::object());
// `code` is one of parse, invalid_argument, read_only, rejected, sequence.
nlohmann::json error_payload(std::uint64_t ref_seq, std::string_view code,
                             std::string_view message);

}  // namespace hvmc::wire

#endif  // HVMC_WIRE_HPP_
