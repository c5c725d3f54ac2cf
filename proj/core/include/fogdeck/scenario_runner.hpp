#pragma once

// Runs a scenario in-process against a virtual clock: one datastore behind
// its HTTP server, every fog node with its offline listener, and a control
// plane, all on loopback. Each step applies the timeline entries that are due,
// steps every live node, lets the control plane refresh, then records what
// changed in the event log.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fogdeck/control_plane.hpp"
#include "fogdeck/fog_agent.hpp"
#include "fogdeck/keys.hpp"
#include "fogdeck/scenario.hpp"

namespace fogdeck::scenario {

struct RunOptions {
  /// Virtual seconds per real second; 0 = as fast as possible.
  double speed = 0.0;
  /// JSON-lines event log; empty = keep in memory only.
  std::filesystem::path log_path;
  /// Data directory root; empty = a fresh temporary directory.
  std::filesystem::path work_dir;
  bool keep_work_dir = false;
  /// Serve the panel API during the run (0 = ephemeral port).
  std::optional<std::uint16_t> panel_port;
  /// Defaults to FOGDECK_KEY_FILE, else keys derived from the scenario name and seed.
  std::optional<KeyRing> keys;
  /// Ignore the timeline (baseline runs).
  bool skip_timeline = false;
  /// Progress lines for humans.
  std::ostream* progress = nullptr;
};

struct AssertionResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct TimedActuation {
  std::int64_t t_ms = 0;
  fog::ActuationEvent event;
};

struct RunResult {
  int exit_code = 0;  // 0 all assertions hold, 1 otherwise
  std::vector<AssertionResult> assertions;
  std::vector<json> events;
  std::vector<SensorReading> final_table;
  std::optional<std::vector<SensorReading>> pre_kill_table;
  std::optional<std::vector<SensorReading>> recovered_table;
  std::map<std::string, fog::AgentCounters> counters;
  std::size_t store_rows = 0;
  bool store_up_at_end = false;
  std::vector<NetworkMode> transitions;
  std::vector<SecurityEvent> security;
  /// Body of GET /api/security fetched before teardown (when the panel ran).
  std::optional<json> api_security;
  std::vector<control::BreachEpisode> episodes;
  std::vector<control::DispatchRecord> alerts;
  std::vector<TimedActuation> actuations;
  std::size_t client_mismatches = 0;
  double wall_seconds = 0.0;
  std::filesystem::path work_dir;
};

/// Throws ScenarioError for problems only detectable at start-up (such as a
/// port already in use); assertion failures are reported in the result.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Event-log line without fields that depend on wall-clock time or ports.
json strip_wall_clock(const json& event);

}  // namespace fogdeck::scenario
