// fogdeck: scenario runner, fleet launcher and standalone components.
//
//   fogdeck run <scenario.yaml> [--speed N] [--log events.jsonl] [--panel-port P]
//   fogdeck fleet --nodes N --devices M --seed S [--duration S] [--speed N]
//   fogdeck panel [--json] --endpoint http://127.0.0.1:7900
//   fogdeck store --port P [--data DIR] [--token T]
//   fogdeck node --config node.yaml
//   fogdeck control --store URL [--panel-port P]
//
// Exit codes: 0 ok, 1 assertion failure or runtime error, 2 usage or invalid scenario.

#include <CLI11.hpp>
#include <httplib.h>

#include <atomic>
#include <csignal>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <thread>

#include "fogdeck/control_plane.hpp"
#include "fogdeck/datastore.hpp"
#include "fogdeck/fleet.hpp"
#include "fogdeck/fog_node.hpp"
#include "fogdeck/keys.hpp"
#include "fogdeck/panel_api.hpp"
#include "fogdeck/scenario.hpp"
#include "fogdeck/scenario_runner.hpp"
#include "fogdeck/store_http.hpp"

using namespace fogdeck;
using namespace std::chrono_literals;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

void install_signals() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
}

std::int64_t wall_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string iso_time(TimestampMs ms) {
  std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << (ms % 1000) << 'Z';
  return os.str();
}

KeyRing keys_or_default() {
  if (auto env = KeyRing::from_environment()) return *env;
  std::cerr << "warning: FOGDECK_KEY_FILE not set, using the built-in development keys\n";
  return KeyRing::derived("fogdeck");
}

int print_result(const scenario::RunResult& r) {
  for (const auto& a : r.assertions) {
    std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << ": " << a.detail << "\n";
  }
  std::uint64_t emitted = 0, dropped = 0;
  for (const auto& [fog, c] : r.counters) {
    emitted += c.emitted;
    dropped += c.dropped;
  }
  std::cout << "emitted " << emitted << ", dropped " << dropped << ", store rows " << r.store_rows << ", "
            << r.transitions.size() << " mode entries, " << r.security.size() << " security events, wall "
            << std::fixed << std::setprecision(2) << r.wall_seconds << " s\n";
  return r.exit_code;
}

// Plain table of what the panel shows.
void print_panel(const control::PanelModel& m) {
  std::cout << "network: " << to_string(m.network.mode) << " since " << iso_time(m.network.since) << "\n";
  if (!m.info.area.empty() || !m.info.operator_name.empty()) {
    std::cout << "info: " << m.info.application << " / " << m.info.operator_name << " / " << m.info.area << "\n";
  }
  std::cout << "\n"
            << std::left << std::setw(24) << "id" << std::setw(22) << "location" << std::setw(14) << "value"
            << std::setw(26) << "timestamp"
            << "indicator\n";
  for (const auto& row : m.stats) {
    std::ostringstream value;
    if (row.value) {
      value << std::fixed << std::setprecision(2) << *row.value;
      if (row.unit) value << (*row.unit == Unit::Celsius ? " C" : " %RH");
    } else {
      value << "-";
    }
    std::cout << std::setw(24) << row.id.str() << std::setw(22) << row.location << std::setw(14) << value.str()
              << std::setw(26) << (row.timestamp ? iso_time(*row.timestamp) : "-") << to_string(row.indicator) << "\n";
  }
  std::cout << "\nhealth:\n";
  for (const auto& h : m.health) {
    std::cout << "  " << std::setw(28) << h.subject.str() << std::setw(12) << to_string(h.state) << h.reason << "\n";
  }
  std::cout << "\nnodes:\n";
  for (const auto& n : m.nodes) {
    std::cout << "  " << std::setw(12) << n.fog_id << std::setw(22) << n.endpoint << std::setw(12)
              << to_string(n.state) << "clients " << n.active_clients << (n.direct ? "  direct" : "") << "\n";
  }
  if (!m.security.empty()) {
    std::cout << "\nsecurity:\n";
    for (const auto& e : m.security) {
      std::cout << "  " << iso_time(e.observed_at) << "  " << std::setw(10) << e.fog_id << std::setw(26)
                << to_string(e.kind) << e.peer << "\n";
    }
  }
  std::cout << "\nbreach episodes: " << m.episodes.size() << ", alerts dispatched: " << m.alerts_dispatched << "\n";
}

int cmd_run(const std::string& path, double speed, const std::string& log, std::optional<std::uint16_t> panel_port,
            const std::string& work_dir, bool keep, bool quiet) {
  scenario::Scenario s;
  try {
    s = scenario::load_scenario(path);
  } catch (const scenario::ScenarioError& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return 2;
  }
  scenario::RunOptions opts;
  opts.speed = speed;
  opts.log_path = log;
  opts.panel_port = panel_port;
  opts.work_dir = work_dir;
  opts.keep_work_dir = keep;
  opts.progress = quiet ? nullptr : &std::cerr;
  try {
    return print_result(scenario::run_scenario(s, opts));
  } catch (const scenario::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_fleet(const FleetOptions& fo, double duration, double speed, std::optional<std::uint16_t> panel_port,
              const std::string& log) {
  scenario::Scenario s;
  s.name = "fleet";
  s.seed = fo.seed;
  s.duration_s = duration;
  s.epoch_ms = wall_ms();
  try {
    s.nodes = generate_fleet(fo);
  } catch (const PortExhausted& e) {
    std::cerr << "PortExhausted: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return 2;
  }
  std::size_t devices = 0;
  for (const auto& n : s.nodes) devices += n.devices.size();
  std::cerr << "fleet: " << s.nodes.size() << " nodes, " << devices << " devices, seed " << fo.seed << "\n";
  scenario::RunOptions opts;
  opts.speed = speed;
  opts.panel_port = panel_port;
  opts.log_path = log;
  opts.progress = &std::cerr;
  try {
    return print_result(scenario::run_scenario(s, opts));
  } catch (const scenario::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_panel(const std::string& endpoint, bool as_json) {
  httplib::Client client(endpoint);
  client.set_connection_timeout(2, 0);
  client.set_read_timeout(5, 0);
  auto res = client.Get("/api/panel");
  if (!res) {
    if (res.error() == httplib::Error::Connection) {
      std::cerr << "ConnectionRefused: no panel API at " << endpoint << "\n";
    } else {
      std::cerr << "request to " << endpoint << " failed: " << httplib::to_string(res.error()) << "\n";
    }
    return 1;
  }
  if (res->status != 200) {
    std::cerr << "panel API returned " << res->status << "\n";
    return 1;
  }
  auto j = json::parse(res->body, nullptr, false);
  if (j.is_discarded()) {
    std::cerr << "panel API returned malformed JSON\n";
    return 1;
  }
  if (as_json) {
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  try {
    print_panel(j.get<control::PanelModel>());
  } catch (const std::exception& e) {
    std::cerr << "unexpected panel model: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cmd_store(const std::string& host, std::uint16_t port, const std::string& data, const std::string& token,
              bool sync) {
  store::Datastore ds(store::StoreOptions{data, sync});
  store::StoreServer server(ds, store::StoreServerOptions{host, port, token});
  server.start();
  std::cerr << "datastore listening on " << server.url() << (data.empty() ? " (memory only)" : "") << "\n";
  install_signals();
  while (!g_stop) std::this_thread::sleep_for(100ms);
  server.stop();
  ds.close();
  return 0;
}

int cmd_node(const std::string& config_path) {
  scenario::NodeFile f;
  try {
    f = scenario::load_node_file(config_path);
  } catch (const scenario::ScenarioError& e) {
    std::cerr << "invalid node file: " << e.what() << "\n";
    return 2;
  }
  auto start = wall_ms();
  fog::NodeConfig cfg;
  cfg.agent.fog_id = f.node.fog_id;
  cfg.agent.rtc = edge::RtcSim{f.node.drift_ppm, start};
  cfg.agent.buffer_capacity = f.node.buffer_capacity;
  cfg.devices = f.node.devices;
  cfg.store_url = f.store_url;
  cfg.store_token = f.store_token;
  cfg.listen_host = f.listen_host;
  cfg.listen_port = f.node.port;
  cfg.key = keys_or_default().key_for(f.node.fog_id);
  fog::FogNode node(std::move(cfg));
  node.start();
  std::cerr << f.node.fog_id << " listening on " << node.endpoint() << ", " << f.node.devices.size() << " devices\n";
  install_signals();
  auto mode = node.cloud_mode();
  while (!g_stop) {
    auto rep = node.step(SimTime(wall_ms() - start));
    if (rep.mode != mode) {
      std::cerr << f.node.fog_id << ": " << to_string(rep.mode) << "\n";
      mode = rep.mode;
    }
    std::this_thread::sleep_for(f.tick);
  }
  node.flush();
  node.stop();
  return 0;
}

int cmd_control(const std::string& store_url, const std::string& token, const std::string& host,
                std::uint16_t panel_port, const std::string& static_dir, std::chrono::milliseconds interval,
                const std::string& alert_log) {
  control::ControlConfig cc;
  cc.store_url = store_url;
  cc.store_token = token;
  cc.keys = keys_or_default();
  auto start = wall_ms();
  cc.epoch_offset_ms = start;
  std::unique_ptr<control::AlertSink> sink;
  if (alert_log.empty()) {
    sink = std::make_unique<control::NullSink>();
  } else {
    sink = std::make_unique<control::FileLogSink>(alert_log);
  }
  control::ControlPlane cp(cc, std::move(sink));
  control::PanelServer panel(cp, control::PanelServerOptions{host, panel_port, static_dir});
  panel.start();
  std::cerr << "panel API on " << panel.url() << ", polling " << store_url << "\n";
  install_signals();
  while (!g_stop) {
    auto rr = cp.refresh(SimTime(wall_ms() - start));
    if (rr.transition) std::cerr << "control plane " << to_string(rr.transition->mode) << "\n";
    std::this_thread::sleep_for(interval);
  }
  panel.stop();
  cp.close_sessions();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fogdeck: fog-layer IoT device management testbed"};
  app.require_subcommand(1);

  std::string scenario_path, log_path, work_dir;
  double speed = 0.0;
  std::uint16_t panel_port = 0;
  bool keep = false, quiet = false;
  auto run = app.add_subcommand("run", "Run a scenario file against a virtual clock");
  run->add_option("scenario", scenario_path, "Scenario YAML")->required()->check(CLI::ExistingFile);
  run->add_option("--speed", speed, "Virtual seconds per real second (0 = unthrottled)")->check(CLI::NonNegativeNumber);
  run->add_option("--log", log_path, "Write the JSON-lines event log here");
  auto run_panel = run->add_option("--panel-port", panel_port, "Serve the panel API during the run");
  run->add_option("--work-dir", work_dir, "Datastore directory (default: a temporary one)");
  run->add_flag("--keep", keep, "Keep the temporary work directory");
  run->add_flag("-q,--quiet", quiet, "No progress lines");

  FleetOptions fo;
  std::size_t nodes = 0, devices = 0;
  std::int64_t push_s = 1;
  double duration = 60.0;
  std::string fleet_log;
  auto fleet = app.add_subcommand("fleet", "Generate and run a fleet with no failures");
  fleet->add_option("--nodes", nodes, "Fog nodes")->required();
  fleet->add_option("--devices", devices, "Devices per node")->required();
  fleet->add_option("--seed", fo.seed, "Base seed")->required();
  fleet->add_option("--duration", duration, "Virtual seconds")->check(CLI::PositiveNumber);
  fleet->add_option("--speed", speed, "Virtual seconds per real second (0 = unthrottled)")->check(CLI::NonNegativeNumber);
  fleet->add_option("--base-port", fo.base_port, "First node listener port (0 = ephemeral)");
  fleet->add_option("--push-period", push_s, "Sensor push period in seconds")->check(CLI::PositiveNumber);
  auto fleet_panel = fleet->add_option("--panel-port", panel_port, "Serve the panel API during the run");
  fleet->add_option("--log", fleet_log, "Write the JSON-lines event log here");

  std::string endpoint;
  bool as_json = false;
  auto panel = app.add_subcommand("panel", "Print the panel of a running control plane");
  panel->add_option("--endpoint", endpoint, "Panel API base URL")->required();
  panel->add_flag("--json", as_json, "Raw PanelModel JSON");

  std::string host = "127.0.0.1", data_dir, token;
  std::uint16_t store_port = store::kDefaultStorePort;
  bool sync = false;
  auto store_cmd = app.add_subcommand("store", "Run the datastore HTTP service");
  store_cmd->add_option("--port", store_port, "Listen port");
  store_cmd->add_option("--host", host, "Listen address");
  store_cmd->add_option("--data", data_dir, "Data directory (default: memory only)");
  store_cmd->add_option("--token", token, "Bearer token clients must present");
  store_cmd->add_flag("--sync", sync, "fsync every commit");

  std::string node_config;
  auto node = app.add_subcommand("node", "Run one fog node in real time");
  node->add_option("--config", node_config, "Node YAML")->required()->check(CLI::ExistingFile);

  std::string store_url, static_dir, alert_log;
  std::uint16_t control_port = control::kDefaultPanelPort;
  std::int64_t interval_ms = 1000;
  auto control_cmd = app.add_subcommand("control", "Run the control plane and panel API in real time");
  control_cmd->add_option("--store", store_url, "Datastore base URL")->required();
  control_cmd->add_option("--token", token, "Datastore bearer token");
  control_cmd->add_option("--host", host, "Panel listen address");
  control_cmd->add_option("--panel-port", control_port, "Panel listen port");
  control_cmd->add_option("--static", static_dir, "Serve a built UI from this directory");
  control_cmd->add_option("--interval-ms", interval_ms, "Refresh interval")->check(CLI::PositiveNumber);
  control_cmd->add_option("--alert-log", alert_log, "Append alert dispatches to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      return cmd_run(scenario_path, speed, log_path, *run_panel ? std::optional(panel_port) : std::nullopt, work_dir,
                     keep, quiet);
    }
    if (*fleet) {
      fo.nodes = nodes;
      fo.devices_per_node = devices;
      fo.push_period = std::chrono::seconds(push_s);
      return cmd_fleet(fo, duration, speed, *fleet_panel ? std::optional(panel_port) : std::nullopt, fleet_log);
    }
    if (*panel) return cmd_panel(endpoint, as_json);
    if (*store_cmd) return cmd_store(host, store_port, data_dir, token, sync);
    if (*node) return cmd_node(node_config);
    if (*control_cmd) {
      return cmd_control(store_url, token, host, control_port, static_dir, std::chrono::milliseconds(interval_ms),
                         alert_log);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
