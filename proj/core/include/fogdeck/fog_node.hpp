#pragma once

// A running fog node: the agent, its datastore client and the offline TCP
// listener that direct clients use when the cloud is gone.
//
// step() is driven by one caller (the scenario clock or the `node` command).
// Connection handlers run on their own threads and share the agent through a
// mutex, so every frame a client sees is ordered against the node's ticks.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "fogdeck/fog_agent.hpp"
#include "fogdeck/messages.hpp"
#include "fogdeck/net.hpp"
#include "fogdeck/store_http.hpp"

namespace fogdeck::fog {

inline constexpr std::uint16_t kDefaultNodePort = 7707;

struct NodeConfig {
  AgentConfig agent;
  std::vector<DeviceSpec> devices;
  std::string store_url;  // empty: never reaches the cloud
  std::string store_token;
  std::chrono::milliseconds store_timeout{2000};
  std::string listen_host = "127.0.0.1";
  std::uint16_t listen_port = 0;  // 0 = ephemeral
  wire::PresharedKey key;
  std::chrono::milliseconds hello_timeout = wire::kHelloTimeout;
};

struct StepReport {
  TickResult tick;
  PushReport push;
  std::size_t instructions_applied = 0;
  bool report_delivered = false;
  CloudMode mode = CloudMode::CloudReachable;
};

class FogNode {
 public:
  explicit FogNode(NodeConfig config);
  ~FogNode();
  FogNode(const FogNode&) = delete;
  FogNode& operator=(const FogNode&) = delete;

  /// Opens the listener and registers with the datastore (retried on later
  /// steps if the store is unreachable). Throws if the port cannot be bound.
  void start();
  /// Closes the listener and every direct session. The node does not restart.
  void stop();
  bool running() const noexcept { return running_; }

  /// One tick: sample, broadcast readings, push, report, apply instructions,
  /// upload security events, then broadcast a Health frame.
  StepReport step(SimTime now);
  /// Pushes whatever is still buffered without sampling.
  PushReport flush();

  const std::string& fog_id() const noexcept { return fog_id_; }
  std::uint16_t port() const noexcept { return port_; }
  std::string endpoint() const;
  std::size_t active_clients() const;

  void inject_failure(const std::string& device_id, bool fail);
  AgentCounters counters() const;
  CloudMode cloud_mode() const;
  NodeReport report(SimTime now) const;
  std::vector<SecurityEvent> security_log() const;
  std::vector<DeviceDescriptor> descriptors() const;

  /// Runs `f(agent)` under the agent lock.
  template <class F>
  auto with_agent(F&& f) const {
    std::lock_guard lock(agent_mutex_);
    return f(static_cast<const FogAgent&>(agent_));
  }

 private:
  struct Session {
    std::unique_ptr<wire::FramedConnection> conn;
    std::string client_id;
    std::atomic<bool> authenticated{false};
    std::atomic<bool> done{false};
    std::thread thread;
  };

  void accept_loop();
  void serve(Session& session);
  void broadcast_locked(wire::MsgType type, const std::vector<std::uint8_t>& payload);
  std::vector<std::uint8_t> health_payload_locked(SimTime now) const;
  std::size_t active_clients_locked() const;
  void security_event_locked(SecurityEventKind kind, const std::string& peer);
  void reap_sessions();
  bool ensure_registered();

  NodeConfig config_;
  std::string fog_id_;
  mutable std::mutex agent_mutex_;
  FogAgent agent_;
  std::unique_ptr<store::StoreClient> store_;
  bool registered_ = false;

  std::unique_ptr<net::Listener> listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;

  mutable std::mutex sessions_mutex_;
  std::list<Session> sessions_;
};

}  // namespace fogdeck::fog
