#pragma once

// Layer-5 supervisor. Polls the datastore while it answers; after
// `failover_threshold` consecutive failed polls it switches to Offline and
// talks to each fog node directly over the framed protocol, using the
// endpoints cached from the node registry. The first successful poll switches
// back and closes the direct sessions.
//
// All public calls are serialized on one mutex; panel() returns a consistent
// snapshot and may be called from any thread.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fogdeck/breach.hpp"
#include "fogdeck/datastore.hpp"
#include "fogdeck/json_codec.hpp"
#include "fogdeck/keys.hpp"
#include "fogdeck/model.hpp"
#include "fogdeck/notifier.hpp"

namespace fogdeck::wire {
class FramedConnection;
}
namespace fogdeck::store {
class StoreClient;
}

namespace fogdeck::control {

inline constexpr std::uint16_t kDefaultPanelPort = 7900;

struct PanelInfo {
  std::string operator_name = "operator";
  std::string application = "fogdeck";
  std::string area = "test-area";
  bool operator==(const PanelInfo&) const = default;
};

struct ControlConfig {
  std::string store_url = "http://127.0.0.1:7800";
  std::string store_token;
  std::chrono::milliseconds poll_timeout{2000};
  int failover_threshold = 3;
  /// A node whose last contact is older than this is Unreachable.
  std::chrono::milliseconds node_timeout{5000};
  std::chrono::milliseconds dial_timeout{1000};
  /// Offline refresh waits this long per node for the heartbeat of the
  /// current tick before rendering what it has.
  std::chrono::milliseconds heartbeat_wait{1000};
  std::chrono::milliseconds ack_timeout{2000};
  std::string client_id = "control-plane";
  KeyRing keys = KeyRing::derived("fogdeck");
  /// Epoch ms at SimTime 0; only used to date transitions and staleness.
  std::int64_t epoch_offset_ms = 0;
  PanelInfo info;
};

struct StatsRow {
  DeviceId id;
  DeviceKind kind = DeviceKind::TemperatureHumiditySensor;
  std::string location;
  std::optional<double> value;
  std::optional<Unit> unit;
  std::optional<TimestampMs> timestamp;
  std::uint64_t seq = 0;
  Indicator indicator = Indicator::Grey;
  bool operator==(const StatsRow&) const = default;
};

struct NodeSummary {
  std::string fog_id;
  std::string endpoint;
  HealthState state = HealthState::Healthy;
  std::string reason;
  std::string cloud_mode;
  std::size_t active_clients = 0;
  TimestampMs last_seen = 0;
  bool direct = false;  // a direct session is open (offline mode)
  bool operator==(const NodeSummary&) const = default;
};

struct PendingChange {
  Target target;
  InstructionBody body;
  std::string path;  // "datastore" | "direct"
  std::optional<std::uint64_t> instr_id;
  TimestampMs issued_at = 0;
  bool operator==(const PendingChange&) const = default;
};

struct PanelModel {
  PanelInfo info;
  std::vector<HealthStatus> health;
  NetworkMode network;
  std::vector<NetworkMode> transitions;
  std::vector<StatsRow> stats;
  std::vector<DeviceDescriptor> controls;
  std::vector<ActuatorState> actuators;
  std::vector<NodeSummary> nodes;
  std::vector<BreachEpisode> episodes;
  std::vector<SecurityEvent> security;
  std::size_t alerts_dispatched = 0;
  std::vector<PendingChange> pending;
  TimestampMs generated_at = 0;
  bool operator==(const PanelModel&) const = default;
};

void to_json(json& j, const PanelInfo& v);
void from_json(const json& j, PanelInfo& v);
void to_json(json& j, const StatsRow& v);
void from_json(const json& j, StatsRow& v);
void to_json(json& j, const NodeSummary& v);
void from_json(const json& j, NodeSummary& v);
void to_json(json& j, const PendingChange& v);
void from_json(const json& j, PendingChange& v);
void to_json(json& j, const BreachEpisode& v);
void from_json(const json& j, BreachEpisode& v);
void to_json(json& j, const DispatchRecord& v);
void to_json(json& j, const PanelModel& v);
void from_json(const json& j, PanelModel& v);

class UnknownDeviceError : public std::runtime_error {
 public:
  explicit UnknownDeviceError(const std::string& target) : std::runtime_error("unknown device: " + target) {}
};

class OfflineNodeUnreachable : public std::runtime_error {
 public:
  OfflineNodeUnreachable(const std::string& fog_id, const std::string& why)
      : std::runtime_error("fog node unreachable in offline mode: " + fog_id + ": " + why) {}
};

struct ControlResult {
  Target target;
  bool ok = false;
  std::string path;  // "datastore" | "direct"
  std::optional<std::uint64_t> instr_id;
  std::string error;
};

void to_json(json& j, const ControlResult& v);

struct RefreshReport {
  bool poll_ok = false;
  std::optional<NetworkMode> transition;
  std::vector<EpisodeUpdate> episodes;
  std::vector<SecurityEvent> new_security;
  std::vector<SensorReading> new_readings;
};

class ControlPlane {
 public:
  explicit ControlPlane(ControlConfig config, std::unique_ptr<AlertSink> sink = nullptr);
  ~ControlPlane();
  ControlPlane(const ControlPlane&) = delete;
  ControlPlane& operator=(const ControlPlane&) = delete;

  /// One refresh cycle at virtual time `now`. Never throws for network faults.
  RefreshReport refresh(SimTime now);

  /// Routes a control change. Throws UnknownDeviceError, ValidationError or
  /// OfflineNodeUnreachable; a node-side rejection comes back with ok = false.
  ControlResult set_control(const Target& target, const InstructionBody& body);
  /// Self-test (3.3 V, 1 kHz, 500 ms) on every known buzzer; never throws.
  std::vector<ControlResult> check_all_actuators();

  PanelModel panel() const;
  NetworkMode mode() const;
  std::vector<NetworkMode> transitions() const;
  std::vector<SecurityEvent> security_feed() const;
  std::vector<DispatchRecord> alerts() const;
  std::vector<BreachEpisode> episodes() const;
  std::size_t direct_sessions() const;
  /// Drops every direct session (used on shutdown and when going Online).
  void close_sessions();

  /// Bumped whenever the panel model changes.
  std::uint64_t revision() const;
  /// Blocks until revision() > after or the timeout passes; returns the revision.
  std::uint64_t wait_for_revision(std::uint64_t after, std::chrono::milliseconds timeout) const;

 private:
  struct Session;

  bool poll_store_locked(RefreshReport& report);
  void go_mode_locked(NetworkMode::Mode mode, const std::string& cause, RefreshReport& report);
  void dial_locked(const std::string& fog_id);
  void drain_locked(const std::string& fog_id, Session& session, SimTime now, RefreshReport& report);
  void handle_frame_locked(const std::string& fog_id, Session& session, std::uint8_t type,
                           const std::vector<std::uint8_t>& payload, RefreshReport& report);
  void observe_reading_locked(const SensorReading& r, RefreshReport& report);
  void merge_security_locked(const std::vector<SecurityEvent>& events, RefreshReport& report);
  std::optional<DeviceDescriptor> find_device_locked(const Target& target) const;
  std::vector<DeviceDescriptor> node_devices_locked(const std::string& fog_id) const;
  ControlResult set_control_locked(const Target& target, const InstructionBody& body);
  PanelModel build_panel_locked() const;
  void publish_locked();
  TimestampMs clock(SimTime t) const noexcept { return config_.epoch_offset_ms + t.count(); }

  ControlConfig config_;
  std::unique_ptr<store::StoreClient> store_;
  Notifier notifier_;
  BreachTracker tracker_;

  mutable std::mutex mutex_;
  mutable std::condition_variable revision_cv_;
  std::uint64_t revision_ = 0;
  std::string last_published_;
  PanelModel snapshot_;

  NetworkMode mode_;
  std::vector<NetworkMode> transitions_;
  int consecutive_failures_ = 0;
  SimTime now_{0};

  std::map<std::string, store::NodeRecord> registry_;
  std::map<std::string, NodeReport> reports_;
  std::map<std::string, TimestampMs> last_seen_;
  std::map<DeviceId, SensorReading> latest_;
  std::set<SecurityEvent> security_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
  std::map<std::string, std::string> dial_errors_;
  std::vector<PendingChange> pending_;
  std::uint64_t next_request_id_ = 1;
};

}  // namespace fogdeck::control
