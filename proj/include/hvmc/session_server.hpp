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

// Live steering session. LiveSession holds the simulation and applies
// commands between ticks; SessionServer runs it at 1 kHz behind a WebSocket
// endpoint and streams state_update frames at the configured rate.

#ifndef HVMC_SESSION_SERVER_HPP_
#define HVMC_SESSION_SERVER_HPP_

#include <cstdint>
#include <memory>
#include <string>

#include "hvmc/config_bundle.hpp"
#include "hvmc/plant_sim.hpp"
#include "hvmc/scenario.hpp"
#include "hvmc/wire.hpp"

namespace hvmc {

class LiveSession {
 public:
  LiveSession(const ConfigBundle& config, const ObjectSpec& object,
              std::string session_id);

  // Applies one decoded command and returns the ack or error reply. The
  // reply's seq is left 0 for the transport to assign.
  wire::Message apply(const wire::Message& command);

  // Advances one tick when running; no-op while paused.
  void step();
  void pause() { running_ = false; }

  // Latest state as a state_update payload.
  nlohmann::json state(const std::string& role, std::uint64_t dropped) const;

  const std::string& session_id() const { return session_id_; }
  bool running() const { return running_; }
  const Session& session() const { return session_; }
  const Pose& hand() const { return hand_; }

 private:
  wire::Message reply_error(const wire::Message& c, std::string_view code,
                            std::string_view msg) const;
  wire::Message reply_ack(const wire::Message& c,
                          nlohmann::json details) const;
  const TickRecord& current() const;

  std::string session_id_;
  Pose home_hand_;
  Pose hand_;
  Session session_;
  bool running_ = false;
  GripperCommand last_command_ = GripperCommand::kNone;
  mutable std::unique_ptr<TickRecord> preview_;
};

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8765;  // 0 picks a free port
  std::string object = "cardboard_box";
  bool autostart = false;
  double tick_hz = 1000.0;     // wall-clock pacing of the simulation loop
};

class SessionServer {
 public:
  SessionServer(ConfigBundle config, ServerOptions options);
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  // Binds and starts the network and simulation threads. Returns the bound
  // port. Throws Error(kSystem) when the port cannot be bound.
  unsigned short start();
  // Stops both threads and closes every connection. Idempotent.
  void stop();

  std::string session_id() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hvmc

#endif  // HVMC_SESSION_SERVER_HPP_
