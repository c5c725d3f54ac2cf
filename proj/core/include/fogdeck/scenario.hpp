#pragma once

// Scenario files (YAML). Schema:
//
//   name: failover                 # required
//   duration_s: 120                # required, > 0
//   tick_ms: 1000                  # virtual step, default 1000
//   seed: 7                        # default 1
//   epoch_ms: 1700000000000        # wall-clock epoch at t = 0
//   control:                       # all optional
//     poll_timeout_ms: 2000
//     failover_threshold: 3
//     node_timeout_ms: 5000
//     alerts: {sink: file|null|smtp, path: alerts.log, url:, from:, to: [..]}
//   store: {sync_writes: false, token: ""}
//   fleet:
//     generate: {nodes: 1, devices: 4, push_period_s: 1}
//     nodes:                       # explicit nodes, appended after generated ones
//       - id: fog-1
//         drift_ppm: 0
//         buffer_capacity: 10000
//         devices:
//           - id: sensor-1
//             kind: temperature_humidity_sensor | clock | buzzer_actuator
//             unit: celsius | percent_rh
//             location: {label: lab, lat: 53.3, lon: -6.2}   # or a plain string
//             push_period_s: 1
//             threshold: [20, 30]
//             email_alerts: false
//             enabled: true
//             waveform: {type: constant|sine|random_walk, base:, amplitude:, period_s:, step:, seed:}
//             noise: 0.0
//             seed: 1
//             window: 1
//   timeline:                      # sorted by at_s
//     - {at_s: 30, action: fail_sensor, node: fog-1, device: sensor-1}
//   assertions:
//     - {kind: mode_sequence, expect: [online, offline, online]}
//
// Timeline actions: fail_sensor, restore_sensor, kill_node, stop_store,
// kill_store, restore_store, set_control {node, device?, body}, check_all,
// rogue_connect {node, name, client_id, key: correct|wrong},
// rogue_disconnect {name}, rogue_tamper {name}, rogue_replay {name}.
//
// Assertion kinds and their fields:
//   mode_sequence       expect: [online, offline, ...]
//   transition_within   to, after_s, within_s
//   health_state        target, state, after_s, within_s
//   continuous_stats    from (seconds or "offline"), to_s, window_s (default 2 x push period)
//   min_readings        min (store rows per enabled sensor)
//   episodes            count, device?
//   alerts              count
//   auto_actuation      (every episode opening has a buzzer actuation)
//   security_event      event, node?, min?
//   clients_consistent
//   no_drops
//   store_rows_match_emitted

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fogdeck/fleet.hpp"
#include "fogdeck/model.hpp"

namespace fogdeck::scenario {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Action {
  FailSensor,
  RestoreSensor,
  KillNode,
  StopStore,
  KillStore,
  RestoreStore,
  SetControl,
  CheckAll,
  RogueConnect,
  RogueDisconnect,
  RogueTamper,
  RogueReplay,
};

std::string_view to_string(Action a) noexcept;

struct TimelineEvent {
  double at_s = 0.0;
  Action action = Action::FailSensor;
  std::string node;
  std::string device;
  std::string name;       // rogue session name
  std::string client_id;  // rogue client id
  bool correct_key = true;
  std::optional<InstructionBody> body;
};

enum class AssertionKind {
  ModeSequence,
  TransitionWithin,
  HealthState,
  ContinuousStats,
  MinReadings,
  Episodes,
  Alerts,
  AutoActuation,
  SecurityEvent,
  ClientsConsistent,
  NoDrops,
  StoreRowsMatchEmitted,
};

std::string_view to_string(AssertionKind k) noexcept;

struct Assertion {
  AssertionKind kind = AssertionKind::NoDrops;
  std::vector<NetworkMode::Mode> modes;
  NetworkMode::Mode to = NetworkMode::Mode::Offline;
  std::optional<Target> target;
  HealthState state = HealthState::Healthy;
  double after_s = 0.0;
  double within_s = 0.0;
  std::optional<double> from_s;  // nullopt with from_offline = first Offline transition
  bool from_offline = false;
  std::optional<double> to_s;
  std::optional<double> window_s;
  std::size_t count = 0;
  std::optional<DeviceId> device;
  SecurityEventKind security_kind = SecurityEventKind::AuthFailure;
  std::string node;
};

struct AlertSinkSpec {
  std::string sink = "file";  // file | null | smtp
  std::string path = "alerts.log";
  std::string url;
  std::string from;
  std::vector<std::string> to;
};

struct Scenario {
  std::string name;
  double duration_s = 0.0;
  std::chrono::milliseconds tick{1000};
  std::uint64_t seed = 1;
  std::int64_t epoch_ms = 1'700'000'000'000;
  std::chrono::milliseconds poll_timeout{2000};
  int failover_threshold = 3;
  std::chrono::milliseconds node_timeout{5000};
  AlertSinkSpec alerts;
  bool sync_writes = false;
  std::string store_token;
  std::vector<NodeSpec> nodes;
  std::vector<TimelineEvent> timeline;
  std::vector<Assertion> assertions;

  const NodeSpec* find_node(const std::string& fog_id) const;
};

/// Throws ScenarioError with a message naming the offending field.
Scenario parse_scenario(const std::string& yaml_text);
Scenario load_scenario(const std::filesystem::path& path);

// Standalone node file for `fogdeck node --config`:
//
//   store_url: http://127.0.0.1:7800   # empty = never reaches the cloud
//   store_token: ""
//   listen: {host: 127.0.0.1, port: 7707}
//   tick_ms: 1000
//   seed: 1
//   node: {id: fog-1, drift_ppm: 0, devices: [...]}   # as in fleet.nodes
struct NodeFile {
  NodeSpec node;
  std::string store_url;
  std::string store_token;
  std::string listen_host = "127.0.0.1";
  std::chrono::milliseconds tick{1000};
};

NodeFile parse_node_file(const std::string& yaml_text);
NodeFile load_node_file(const std::filesystem::path& path);

/// Cross-reference checks (ids exist, timeline sorted...). Throws ScenarioError.
void validate(const Scenario& s);

}  // namespace fogdeck::scenario
