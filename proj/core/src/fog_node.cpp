#include "fogdeck/fog_node.hpp"

#include "spdlog/spdlog.h"

namespace fogdeck::fog {

using namespace std::chrono_literals;

FogNode::FogNode(NodeConfig config)
    : config_(std::move(config)), fog_id_(config_.agent.fog_id), agent_(config_.agent, config_.devices) {
  if (!config_.store_url.empty()) {
    store_ = std::make_unique<store::StoreClient>(config_.store_url, config_.store_token, config_.store_timeout);
  }
}

FogNode::~FogNode() { stop(); }

void FogNode::start() {
  if (running_) return;
  listener_ = std::make_unique<net::Listener>(config_.listen_host, config_.listen_port);
  port_ = listener_->port();
  running_ = true;
  stopping_ = false;
  accept_thread_ = std::thread([this] { accept_loop(); });
  std::lock_guard lock(agent_mutex_);
  ensure_registered();
}

void FogNode::stop() {
  if (!running_) return;
  stopping_ = true;
  if (listener_) listener_->close();
  if (accept_thread_.joinable()) accept_thread_.join();
  std::list<Session> sessions;
  {
    std::lock_guard lock(sessions_mutex_);
    for (auto& s : sessions_) s.conn->shutdown();
    sessions.splice(sessions.end(), sessions_);
  }
  for (auto& s : sessions) {
    if (s.thread.joinable()) s.thread.join();
  }
  listener_.reset();
  running_ = false;
}

std::string FogNode::endpoint() const { return config_.listen_host + ":" + std::to_string(port_); }

bool FogNode::ensure_registered() {
  if (registered_ || !store_) return registered_;
  try {
    store_->register_node(store::NodeRecord{fog_id_, agent_.descriptors(), 0, endpoint()});
    registered_ = true;
  } catch (const store::StoreError& e) {
    spdlog::debug("{}: registration deferred: {}", fog_id_, e.what());
  }
  return registered_;
}

void FogNode::accept_loop() {
  while (!stopping_) {
    std::optional<net::Socket> sock;
    try {
      sock = listener_->accept(50ms);
    } catch (const net::NetError& e) {
      spdlog::warn("{}: accept failed: {}", fog_id_, e.what());
      continue;
    }
    if (!sock) continue;
    reap_sessions();
    std::lock_guard lock(sessions_mutex_);
    if (stopping_) return;
    auto& s = sessions_.emplace_back();
    s.conn = std::make_unique<wire::FramedConnection>(std::move(*sock), config_.key);
    s.thread = std::thread([this, &s] { serve(s); });
  }
}

void FogNode::reap_sessions() {
  std::list<Session> finished;
  {
    std::lock_guard lock(sessions_mutex_);
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      auto next = std::next(it);
      if (it->done) finished.splice(finished.end(), sessions_, it);
      it = next;
    }
  }
  for (auto& s : finished) {
    if (s.thread.joinable()) s.thread.join();
  }
}

void FogNode::security_event_locked(SecurityEventKind kind, const std::string& peer) {
  agent_.record_security_event(SecurityEvent{fog_id_, kind, peer, agent_.clock(agent_.last_tick())});
}

std::size_t FogNode::active_clients_locked() const {
  std::lock_guard lock(sessions_mutex_);
  std::size_t n = 0;
  for (const auto& s : sessions_) n += (s.authenticated && !s.done) ? 1 : 0;
  return n;
}

std::size_t FogNode::active_clients() const { return active_clients_locked(); }

std::vector<std::uint8_t> FogNode::health_payload_locked(SimTime now) const {
  return wire::to_payload(wire::HealthMsg{now.count(), agent_.report(now, active_clients_locked()), agent_.security_log()});
}

void FogNode::serve(Session& session) {
  auto& conn = *session.conn;
  auto peer = conn.peer_address();

  try {
    auto hello = wire::server_await_hello(conn, config_.hello_timeout);
    std::lock_guard lock(agent_mutex_);
    if (!agent_.is_known_client(hello.client_id)) {
      security_event_locked(SecurityEventKind::UnknownClientConnected, peer + " as " + hello.client_id);
    }
    session.client_id = hello.client_id;
    conn.send(wire::MsgType::Ack, wire::to_payload(wire::AckMsg{0, true, hello.challenge, "welcome"}));
    auto latest = agent_.latest_readings();
    if (!latest.empty()) {
      conn.send(wire::MsgType::ReadingBatch, wire::to_payload(wire::ReadingBatchMsg{fog_id_, std::move(latest)}));
    }
    session.authenticated = true;
    conn.send(wire::MsgType::Health, health_payload_locked(agent_.last_tick()));
  } catch (const wire::HandshakeError& e) {
    if (e.code() == wire::HandshakeErrc::AuthFailure) {
      std::lock_guard lock(agent_mutex_);
      security_event_locked(SecurityEventKind::AuthFailure, peer);
    }
    spdlog::info("{}: handshake from {} rejected: {}", fog_id_, peer, e.what());
    conn.shutdown();
    session.done = true;
    return;
  } catch (const std::exception& e) {
    spdlog::info("{}: session {} ended during handshake: {}", fog_id_, peer, e.what());
    conn.shutdown();
    session.done = true;
    return;
  }

  while (!stopping_) {
    std::optional<wire::DecodedFrame> frame;
    try {
      frame = conn.receive(200ms);
    } catch (const wire::FrameError& e) {
      std::lock_guard lock(agent_mutex_);
      if (e.code() == wire::FrameErrc::ReplayDetected) {
        security_event_locked(SecurityEventKind::ReplayDetected, peer);
      } else if (e.code() != wire::FrameErrc::UnknownMessageType) {
        security_event_locked(SecurityEventKind::FrameTampered, peer);
      }
      try {
        conn.send(wire::MsgType::Error, wire::to_payload(wire::ErrorMsg{std::string(wire::to_string(e.code())), e.what()}));
      } catch (const std::exception&) {
        break;
      }
      if (conn.desynchronized()) break;
      continue;
    } catch (const std::exception&) {
      break;  // peer closed or socket error
    }
    if (!frame) continue;

    try {
      std::lock_guard lock(agent_mutex_);
      switch (frame->type) {
        case wire::MsgType::Instruction: {
          auto msg = wire::instruction_from_payload(frame->payload);
          wire::AckMsg ack{msg.request_id, true, "", "applied"};
          try {
            msg.instruction.instr_id = 0;
            agent_.apply_direct(msg.instruction);
          } catch (const std::exception& e) {
            ack.ok = false;
            ack.message = e.what();
          }
          conn.send(wire::MsgType::Ack, wire::to_payload(ack));
          // Lets the client see the effect without waiting for the next tick.
          if (ack.ok) conn.send(wire::MsgType::Health, health_payload_locked(agent_.last_tick()));
          break;
        }
        case wire::MsgType::Health:
          conn.send(wire::MsgType::Health, health_payload_locked(agent_.last_tick()));
          break;
        default:
          conn.send(wire::MsgType::Error, wire::to_payload(wire::ErrorMsg{"unexpected", "frame type not accepted here"}));
          break;
      }
    } catch (const std::invalid_argument& e) {
      try {
        conn.send(wire::MsgType::Error, wire::to_payload(wire::ErrorMsg{"bad_payload", e.what()}));
      } catch (const std::exception&) {
        break;
      }
    } catch (const std::exception&) {
      break;
    }
  }
  conn.shutdown();
  session.done = true;
}

void FogNode::broadcast_locked(wire::MsgType type, const std::vector<std::uint8_t>& payload) {
  std::lock_guard lock(sessions_mutex_);
  for (auto& s : sessions_) {
    if (!s.authenticated || s.done) continue;
    try {
      s.conn->send(type, payload);
    } catch (const std::exception& e) {
      spdlog::info("{}: dropping client {}: {}", fog_id_, s.conn->peer_address(), e.what());
      s.conn->shutdown();
    }
  }
}

StepReport FogNode::step(SimTime now) {
  StepReport out;
  std::lock_guard lock(agent_mutex_);
  out.tick = agent_.tick(now);
  if (!out.tick.readings.empty()) {
    broadcast_locked(wire::MsgType::ReadingBatch, wire::to_payload(wire::ReadingBatchMsg{fog_id_, out.tick.readings}));
  }

  if (store_) {
    bool cloud_ok = true;
    if (!agent_.pending().empty()) {
      out.push = agent_.push_cycle([this](std::span<const SensorReading> batch) {
        ensure_registered();
        return store_->put_readings(batch);
      });
      cloud_ok = !out.push.error.has_value();
    }
    if (cloud_ok) {
      try {
        ensure_registered();
        store_->put_report(agent_.report(now, active_clients_locked()));
        out.report_delivered = true;
        out.instructions_applied = agent_.apply_instructions(store_->fetch_instructions(fog_id_, agent_.last_applied_instr()));
        if (auto events = agent_.take_unsent_security(); !events.empty()) {
          try {
            store_->put_security(events);
          } catch (const std::exception&) {
            agent_.requeue_security(std::move(events));
            throw;
          }
        }
      } catch (const std::exception& e) {
        cloud_ok = false;
        spdlog::debug("{}: cloud round-trip failed: {}", fog_id_, e.what());
      }
      // A non-empty push already counted toward reachability.
      if (out.push.pushed == 0 && !out.push.error) agent_.record_cloud_result(cloud_ok);
    }
  }
  out.mode = agent_.cloud_mode();
  out.push.mode = out.mode;
  out.push.buffered = agent_.pending().size();

  broadcast_locked(wire::MsgType::Health, health_payload_locked(now));
  return out;
}

PushReport FogNode::flush() {
  std::lock_guard lock(agent_mutex_);
  PushReport out;
  if (!store_ || agent_.pending().empty()) {
    out.mode = agent_.cloud_mode();
    out.buffered = agent_.pending().size();
    return out;
  }
  return agent_.push_cycle([this](std::span<const SensorReading> batch) {
    ensure_registered();
    return store_->put_readings(batch);
  });
}

void FogNode::inject_failure(const std::string& device_id, bool fail) {
  std::lock_guard lock(agent_mutex_);
  agent_.inject_failure(device_id, fail);
}

AgentCounters FogNode::counters() const {
  std::lock_guard lock(agent_mutex_);
  return agent_.counters();
}

CloudMode FogNode::cloud_mode() const {
  std::lock_guard lock(agent_mutex_);
  return agent_.cloud_mode();
}

NodeReport FogNode::report(SimTime now) const {
  std::lock_guard lock(agent_mutex_);
  return agent_.report(now, active_clients_locked());
}

std::vector<SecurityEvent> FogNode::security_log() const {
  std::lock_guard lock(agent_mutex_);
  return agent_.security_log();
}

std::vector<DeviceDescriptor> FogNode::descriptors() const {
  std::lock_guard lock(agent_mutex_);
  return agent_.descriptors();
}

}  // namespace fogdeck::fog
