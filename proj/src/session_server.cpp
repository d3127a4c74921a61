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

#include "hvmc/session_server.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <mutex>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "hvmc/json_io.hpp"

namespace hvmc {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using json_io::json;

// LiveSession ---------------------------------------------------------------

namespace {

JointState home_state(const ConfigBundle& config) {
  JointState s = JointState::Zero(config.chain.dof());
  s.q = config.scene.robot_home;
  return s;
}

bool same_pose(const Pose& a, const Pose& b) {
  return a.position == b.position && a.orientation == b.orientation;
}

std::string_view error_code_name(ErrorCode c) {
  return c == ErrorCode::kParse ? "parse" : "invalid_argument";
}

}  // namespace

LiveSession::LiveSession(const ConfigBundle& config, const ObjectSpec& object,
                         std::string session_id)
    : session_id_(std::move(session_id)),
      home_hand_(config.scene.hand_nominal),
      hand_(config.scene.hand_nominal),
      session_(make_session_setup(config, object, home_state(config)),
               config.scene.hand_nominal) {}

wire::Message LiveSession::reply_error(const wire::Message& c,
                                       std::string_view code,
                                       std::string_view msg) const {
  return {wire::Kind::kError, session_id_, 0,
          wire::error_payload(c.seq, code, msg)};
}

wire::Message LiveSession::reply_ack(const wire::Message& c,
                                     json details) const {
  return {wire::Kind::kAck, session_id_, 0,
          wire::ack_payload(c.seq, c.kind, std::move(details))};
}

wire::Message LiveSession::apply(const wire::Message& c) {
  try {
    switch (c.kind) {
      case wire::Kind::kHandPoseCmd: {
        hand_ = wire::hand_pose_from_payload(c.payload);
        preview_.reset();
        return reply_ack(c, {{"t", session_.state().t}});
      }
      case wire::Kind::kProfileCmd: {
        const Profile p = wire::profile_from_payload(c.payload);
        if (session_.fsm().phase == GripperPhase::kGrasping) {
          return reply_error(c, "rejected",
                             "profile changes are rejected while GRASPING");
        }
        session_.set_profile(p);
        preview_.reset();
        return reply_ack(c, {{"profile", to_string(p)},
                             {"spring2_f_max",
                              session_.controller().spring2.f_max}});
      }
      case wire::Kind::kLifecycleCmd: {
        const wire::Lifecycle a = wire::lifecycle_from_payload(c.payload);
        bool changed = false;
        if (a == wire::Lifecycle::kStart) {
          changed = !running_;
          running_ = true;
        } else if (a == wire::Lifecycle::kPause) {
          changed = running_;
          running_ = false;
        } else {
          changed = running_ || session_.ticks() > 0 ||
                    !same_pose(hand_, home_hand_);
          session_.reset(home_hand_);
          hand_ = home_hand_;
          running_ = false;
          last_command_ = GripperCommand::kNone;
          preview_.reset();
        }
        return reply_ack(c, {{"action", to_string(a)}, {"changed", changed}});
      }
      default:
        return reply_error(c, "invalid_argument",
                           std::string(wire::to_string(c.kind)) +
                               " is not a command");
    }
  } catch (const Error& e) {
    return reply_error(c, error_code_name(e.code()), e.what());
  }
}

void LiveSession::step() {
  if (!running_) return;
  const TickRecord& r = session_.tick(hand_);
  if (r.command != GripperCommand::kNone) last_command_ = r.command;
  preview_.reset();
}

const TickRecord& LiveSession::current() const {
  if (session_.ticks() > 0) return session_.last();
  if (!preview_) {
    // Evaluate the first tick on a copy so a paused, fresh session still
    // reports its geometry.
    Session copy = session_;
    preview_ = std::make_unique<TickRecord>(copy.tick(hand_));
  }
  return *preview_;
}

json LiveSession::state(const std::string& role, std::uint64_t dropped) const {
  wire::StateContext ctx;
  ctx.running = running_;
  ctx.profile = session_.controller().profile;
  ctx.spring2_f_max = session_.controller().spring2.f_max;
  ctx.last_command = last_command_;
  ctx.role = role;
  ctx.dropped = dropped;
  return wire::state_payload(current(), ctx);
}

// SessionServer -------------------------------------------------------------

namespace {

constexpr std::size_t kMaxControlQueue = 256;

std::string make_session_id() {
  std::random_device rd;
  std::uint64_t v = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  return json_io::hex64(v);
}

}  // namespace

struct SessionServer::Impl {
  struct Client {
    Client(tcp::socket socket, std::uint64_t id)
        : ws(std::move(socket)), id(id) {}

    websocket::stream<tcp::socket> ws;
    std::uint64_t id;
    beast::flat_buffer buffer;
    std::deque<wire::Message> control;
    std::optional<json> pending_state;
    std::string out_text;
    bool writing = false;
    bool open = true;
    std::uint64_t out_seq = 0;
    std::optional<std::uint64_t> in_seq;
    std::uint64_t dropped = 0;
  };

  struct Incoming {
    std::uint64_t client = 0;
    wire::Message message;
    bool disconnect = false;
  };

  Impl(ConfigBundle c, ServerOptions o)
      : config(std::move(c)),
        options(std::move(o)),
        object(load_object(options.object)),
        session_id(make_session_id()),
        live(config, object, session_id),
        acceptor(ioc) {}

  ConfigBundle config;
  ServerOptions options;
  ObjectSpec object;
  std::string session_id;
  LiveSession live;  // owned by the simulation thread once started

  asio::io_context ioc;
  tcp::acceptor acceptor;
  std::vector<std::shared_ptr<Client>> clients;  // network thread only
  std::uint64_t steering = 0;                    // 0: none
  std::uint64_t next_client_id = 1;

  std::mutex queue_mu;
  std::deque<Incoming> queue;

  std::thread net_thread;
  std::thread sim_thread;
  std::atomic<bool> stopping{false};
  bool started = false;
  unsigned short bound_port = 0;

  // Network thread ----------------------------------------------------------

  std::shared_ptr<Client> find(std::uint64_t id) {
    for (auto& c : clients) {
      if (c->id == id) return c;
    }
    return nullptr;
  }

  void do_accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      auto client = std::make_shared<Client>(std::move(socket),
                                             next_client_id++);
      client->ws.set_option(
          websocket::stream_base::timeout::suggested(beast::role_type::server));
      client->ws.async_accept([this, client](beast::error_code aec) {
        if (aec) return;
        clients.push_back(client);
        if (steering == 0) steering = client->id;
        do_read(client);
      });
      do_accept();
    });
  }

  void do_read(const std::shared_ptr<Client>& client) {
    client->ws.async_read(
        client->buffer,
        [this, client](beast::error_code ec, std::size_t) {
          if (ec) {
            drop_client(client);
            return;
          }
          const std::string text = beast::buffers_to_string(client->buffer.data());
          client->buffer.consume(client->buffer.size());
          on_message(client, text);
          do_read(client);
        });
  }

  void on_message(const std::shared_ptr<Client>& client,
                  const std::string& text) {
    wire::Message m;
    try {
      m = wire::decode(text);
    } catch (const Error& e) {
      queue_control(client, {wire::Kind::kError, session_id, 0,
                             wire::error_payload(0, "parse", e.what())});
      return;
    }
    auto reject = [&](std::string_view code, std::string_view msg) {
      queue_control(client, {wire::Kind::kError, session_id, 0,
                             wire::error_payload(m.seq, code, msg)});
    };
    if (!wire::is_command(m.kind)) {
      reject("invalid_argument", "clients may only send commands");
      return;
    }
    if (!m.session_id.empty() && m.session_id != session_id) {
      reject("invalid_argument", "unknown session_id");
      return;
    }
    if (client->in_seq && m.seq <= *client->in_seq) {
      reject("sequence", "seq must be strictly increasing");
      return;
    }
    client->in_seq = m.seq;
    if (client->id != steering) {
      reject("read_only", "another client is steering this session");
      return;
    }
    std::lock_guard<std::mutex> lock(queue_mu);
    queue.push_back({client->id, std::move(m), false});
  }

  void drop_client(const std::shared_ptr<Client>& client) {
    if (!client->open) return;
    client->open = false;
    std::erase(clients, client);
    if (client->id == steering) {
      steering = clients.empty() ? 0 : clients.front()->id;
      std::lock_guard<std::mutex> lock(queue_mu);
      queue.push_back({client->id, {}, true});
    }
  }

  void queue_control(const std::shared_ptr<Client>& client, wire::Message m) {
    if (!client->open) return;
    if (client->control.size() >= kMaxControlQueue) client->control.pop_front();
    client->control.push_back(std::move(m));
    flush(client);
  }

  void queue_state(const std::shared_ptr<Client>& client, const json& state) {
    if (!client->open) return;
    if (client->pending_state) ++client->dropped;
    client->pending_state = state;
    flush(client);
  }

  void flush(const std::shared_ptr<Client>& client) {
    if (client->writing || !client->open) return;
    wire::Message m;
    if (!client->control.empty()) {
      m = std::move(client->control.front());
      client->control.pop_front();
    } else if (client->pending_state) {
      m.kind = wire::Kind::kStateUpdate;
      m.session_id = session_id;
      m.payload = std::move(*client->pending_state);
      client->pending_state.reset();
      m.payload["role"] = client->id == steering ? "steering" : "observer";
      m.payload["dropped"] = client->dropped;
    } else {
      return;
    }
    m.seq = ++client->out_seq;
    client->out_text = wire::encode(m);
    client->writing = true;
    client->ws.text(true);
    client->ws.async_write(
        asio::buffer(client->out_text),
        [this, client](beast::error_code ec, std::size_t) {
          client->writing = false;
          if (ec) {
            drop_client(client);
            return;
          }
          flush(client);
        });
  }

  // Simulation thread -------------------------------------------------------

  void sim_loop() {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(1.0 / options.tick_hz));
    const long ticks_per_frame = std::max<long>(
        1, std::lround(options.tick_hz / config.stream_hz));
    auto next = clock::now();
    long iteration = 0;
    while (!stopping.load()) {
      std::deque<Incoming> batch;
      {
        std::lock_guard<std::mutex> lock(queue_mu);
        batch.swap(queue);
      }
      for (Incoming& in : batch) {
        if (in.disconnect) {
          live.pause();
          continue;
        }
        wire::Message reply = live.apply(in.message);
        asio::post(ioc, [this, id = in.client, r = std::move(reply)]() mutable {
          if (auto c = find(id)) queue_control(c, std::move(r));
        });
      }
      try {
        live.step();
      } catch (const Error& e) {
        live.pause();
        wire::Message err{wire::Kind::kError, session_id, 0,
                          wire::error_payload(0, "system", e.what())};
        asio::post(ioc, [this, err]() {
          for (auto& c : clients) queue_control(c, err);
        });
      }
      if (iteration % ticks_per_frame == 0) {
        json state = live.state("", 0);
        asio::post(ioc, [this, s = std::move(state)]() {
          for (auto& c : clients) queue_state(c, s);
        });
      }
      ++iteration;
      next += period;
      const auto now = clock::now();
      if (now - next > std::chrono::milliseconds(50)) next = now;
      std::this_thread::sleep_until(next);
    }
  }
};

SessionServer::SessionServer(ConfigBundle config, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(options))) {
  if (impl_->options.autostart) {
    wire::Message start{wire::Kind::kLifecycleCmd, impl_->session_id, 0,
                        {{"action", "start"}}};
    impl_->live.apply(start);
  }
}

SessionServer::~SessionServer() { stop(); }

unsigned short SessionServer::start() {
  Impl& s = *impl_;
  if (s.started) return s.bound_port;
  try {
    const tcp::endpoint ep(asio::ip::make_address(s.options.address),
                           s.options.port);
    s.acceptor.open(ep.protocol());
    s.acceptor.set_option(asio::socket_base::reuse_address(true));
    s.acceptor.bind(ep);
    s.acceptor.listen();
  } catch (const boost::system::system_error& e) {
    throw Error(ErrorCode::kSystem, e.what(),
                "serve " + s.options.address + ":" +
                    std::to_string(s.options.port));
  }
  s.started = true;
  s.bound_port = s.acceptor.local_endpoint().port();
  s.do_accept();
  s.net_thread = std::thread([&s] { s.ioc.run(); });
  s.sim_thread = std::thread([&s] { s.sim_loop(); });
  return s.bound_port;
}

void SessionServer::stop() {
  Impl& s = *impl_;
  if (!s.started || s.stopping.exchange(true)) return;
  if (s.sim_thread.joinable()) s.sim_thread.join();
  asio::post(s.ioc, [&s] {
    beast::error_code ec;
    s.acceptor.close(ec);
    for (auto& c : s.clients) {
      c->open = false;
      beast::get_lowest_layer(c->ws).close(ec);
    }
    s.clients.clear();
    s.ioc.stop();
  });
  if (s.net_thread.joinable()) s.net_thread.join();
}

std::string SessionServer::session_id() const { return impl_->session_id; }

}  // namespace hvmc
