#include "fogdeck/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "fogdeck/fog_node.hpp"
#include "fogdeck/json_codec.hpp"

namespace fogdeck::scenario {

std::string_view to_string(Action a) noexcept {
  switch (a) {
    case Action::FailSensor: return "fail_sensor";
    case Action::RestoreSensor: return "restore_sensor";
    case Action::KillNode: return "kill_node";
    case Action::StopStore: return "stop_store";
    case Action::KillStore: return "kill_store";
    case Action::RestoreStore: return "restore_store";
    case Action::SetControl: return "set_control";
    case Action::CheckAll: return "check_all";
    case Action::RogueConnect: return "rogue_connect";
    case Action::RogueDisconnect: return "rogue_disconnect";
    case Action::RogueTamper: return "rogue_tamper";
    case Action::RogueReplay: return "rogue_replay";
  }
  return "unknown";
}

std::string_view to_string(AssertionKind k) noexcept {
  switch (k) {
    case AssertionKind::ModeSequence: return "mode_sequence";
    case AssertionKind::TransitionWithin: return "transition_within";
    case AssertionKind::HealthState: return "health_state";
    case AssertionKind::ContinuousStats: return "continuous_stats";
    case AssertionKind::MinReadings: return "min_readings";
    case AssertionKind::Episodes: return "episodes";
    case AssertionKind::Alerts: return "alerts";
    case AssertionKind::AutoActuation: return "auto_actuation";
    case AssertionKind::SecurityEvent: return "security_event";
    case AssertionKind::ClientsConsistent: return "clients_consistent";
    case AssertionKind::NoDrops: return "no_drops";
    case AssertionKind::StoreRowsMatchEmitted: return "store_rows_match_emitted";
  }
  return "unknown";
}

const NodeSpec* Scenario::find_node(const std::string& fog_id) const {
  for (const auto& n : nodes) {
    if (n.fog_id == fog_id) return &n;
  }
  return nullptr;
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ScenarioError(where + ": " + what); }

template <class T>
T get(const YAML::Node& n, const std::string& where) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(where, "wrong type");
  }
}

template <class T>
T get_or(const YAML::Node& parent, const char* key, T fallback, const std::string& where) {
  auto n = parent[key];
  if (!n || n.IsNull()) return fallback;
  return get<T>(n, where + "." + key);
}

template <class T>
T require(const YAML::Node& parent, const char* key, const std::string& where) {
  auto n = parent[key];
  if (!n || n.IsNull()) fail(where, std::string("missing '") + key + "'");
  return get<T>(n, where + "." + key);
}

template <class F>
auto parse_enum(const std::string& text, const std::string& where, F&& parser) {
  try {
    return parser(text);
  } catch (const std::exception&) {
    fail(where, "unknown value '" + text + "'");
  }
}

void check_keys(const YAML::Node& n, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!n.IsMap()) fail(where, "expected a mapping");
  for (const auto& kv : n) {
    auto key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      fail(where, "unknown field '" + key + "'");
    }
  }
}

json to_json_value(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      json j = json::object();
      for (const auto& kv : n) j[kv.first.as<std::string>()] = to_json_value(kv.second);
      return j;
    }
    case YAML::NodeType::Sequence: {
      json j = json::array();
      for (const auto& v : n) j.push_back(to_json_value(v));
      return j;
    }
    case YAML::NodeType::Scalar: {
      auto s = n.Scalar();
      if (s == "true") return true;
      if (s == "false") return false;
      try {
        std::size_t pos = 0;
        auto i = std::stoll(s, &pos);
        if (pos == s.size()) return i;
        auto d = std::stod(s, &pos);
        if (pos == s.size()) return d;
      } catch (const std::exception&) {
      }
      return s;
    }
    default:
      return nullptr;
  }
}

edge::Waveform parse_waveform(const YAML::Node& n, const std::string& where) {
  check_keys(n, {"type", "base", "amplitude", "period_s", "step", "seed"}, where);
  auto type = require<std::string>(n, "type", where);
  if (type == "constant") return edge::Constant{get_or<double>(n, "base", 25.0, where)};
  if (type == "sine") {
    edge::Sine s{get_or<double>(n, "base", 25.0, where), get_or<double>(n, "amplitude", 1.0, where),
                 get_or<double>(n, "period_s", 60.0, where)};
    if (!(s.period_s > 0)) fail(where, "period_s must be > 0");
    return s;
  }
  if (type == "random_walk") {
    return edge::RandomWalk{get_or<double>(n, "base", 25.0, where), get_or<double>(n, "step", 0.1, where),
                            get_or<std::uint64_t>(n, "seed", 0, where)};
  }
  fail(where, "unknown waveform '" + type + "'");
}

fog::DeviceSpec parse_device(const YAML::Node& n, const std::string& fog_id, std::uint64_t seed,
                             const std::string& where) {
  check_keys(n,
             {"id", "kind", "unit", "location", "push_period_s", "threshold", "email_alerts", "enabled", "waveform",
              "noise", "seed", "window"},
             where);
  fog::DeviceSpec spec;
  auto& d = spec.desc;
  d.id = DeviceId{fog_id, require<std::string>(n, "id", where)};
  d.kind = parse_enum(get_or<std::string>(n, "kind", "temperature_humidity_sensor", where), where + ".kind",
                      parse_device_kind);
  if (auto u = n["unit"]; u && !u.IsNull()) {
    d.unit = parse_enum(get<std::string>(u, where + ".unit"), where + ".unit", parse_unit);
  } else if (is_sensor(d.kind)) {
    d.unit = Unit::Celsius;
  }
  if (auto loc = n["location"]; loc && !loc.IsNull()) {
    if (loc.IsScalar()) {
      d.location.label = loc.as<std::string>();
    } else {
      check_keys(loc, {"label", "lat", "lon"}, where + ".location");
      d.location.label = get_or<std::string>(loc, "label", "", where + ".location");
      if (loc["lat"]) d.location.latitude = get<double>(loc["lat"], where + ".location.lat");
      if (loc["lon"]) d.location.longitude = get<double>(loc["lon"], where + ".location.lon");
    }
  }
  d.push_period = std::chrono::seconds(get_or<std::int64_t>(n, "push_period_s", 5, where));
  if (auto t = n["threshold"]; t && !t.IsNull()) {
    if (!t.IsSequence() || t.size() != 2) fail(where + ".threshold", "expected [low, high]");
    d.threshold = WorkingRange{get<double>(t[0], where + ".threshold"), get<double>(t[1], where + ".threshold")};
  }
  d.email_alerts = get_or<bool>(n, "email_alerts", false, where);
  d.enabled = get_or<bool>(n, "enabled", true, where);
  if (auto w = n["waveform"]; w && !w.IsNull()) spec.waveform = parse_waveform(w, where + ".waveform");
  spec.noise_stddev = get_or<double>(n, "noise", 0.0, where);
  spec.seed = get_or<std::uint64_t>(n, "seed", edge::mix64(seed ^ fnv1a(d.id.str())), where);
  auto window = get_or<std::int64_t>(n, "window", 1, where);
  if (window < 1) fail(where + ".window", "must be >= 1");
  spec.window = static_cast<std::size_t>(window);

  auto violations = validate_descriptor(d);
  if (!violations.empty()) {
    std::string msg;
    for (auto v : violations) msg += std::string(msg.empty() ? "" : ", ") + std::string(to_string(v));
    fail(where, "invalid device (" + msg + ")");
  }
  return spec;
}

NodeSpec parse_node(const YAML::Node& n, std::uint64_t seed, const std::string& where) {
  check_keys(n, {"id", "drift_ppm", "buffer_capacity", "port", "devices"}, where);
  NodeSpec node;
  node.fog_id = require<std::string>(n, "id", where);
  if (!is_valid_identifier(node.fog_id)) fail(where + ".id", "invalid identifier '" + node.fog_id + "'");
  node.drift_ppm = get_or<double>(n, "drift_ppm", 0.0, where);
  node.buffer_capacity = get_or<std::size_t>(n, "buffer_capacity", fog::kDefaultBufferCapacity, where);
  if (node.buffer_capacity == 0) fail(where + ".buffer_capacity", "must be > 0");
  node.port = get_or<std::uint16_t>(n, "port", 0, where);
  auto devices = n["devices"];
  if (!devices || !devices.IsSequence()) fail(where, "missing 'devices' list");
  for (std::size_t i = 0; i < devices.size(); ++i) {
    node.devices.push_back(parse_device(devices[i], node.fog_id, seed, where + ".devices[" + std::to_string(i) + "]"));
  }
  return node;
}

TimelineEvent parse_event(const YAML::Node& n, const std::string& where) {
  check_keys(n, {"at_s", "action", "node", "device", "name", "client_id", "key", "body"}, where);
  TimelineEvent e;
  e.at_s = require<double>(n, "at_s", where);
  if (e.at_s < 0) fail(where + ".at_s", "must be >= 0");
  auto action = require<std::string>(n, "action", where);
  static const std::map<std::string, Action> actions = {
      {"fail_sensor", Action::FailSensor},       {"restore_sensor", Action::RestoreSensor},
      {"kill_node", Action::KillNode},           {"stop_store", Action::StopStore},
      {"kill_store", Action::KillStore},         {"restore_store", Action::RestoreStore},
      {"set_control", Action::SetControl},       {"check_all", Action::CheckAll},
      {"rogue_connect", Action::RogueConnect},   {"rogue_disconnect", Action::RogueDisconnect},
      {"rogue_tamper", Action::RogueTamper},     {"rogue_replay", Action::RogueReplay},
  };
  auto it = actions.find(action);
  if (it == actions.end()) fail(where + ".action", "unknown action '" + action + "'");
  e.action = it->second;
  e.node = get_or<std::string>(n, "node", "", where);
  e.device = get_or<std::string>(n, "device", "", where);
  e.name = get_or<std::string>(n, "name", "rogue", where);
  e.client_id = get_or<std::string>(n, "client_id", "rogue-client", where);
  auto key = get_or<std::string>(n, "key", "correct", where);
  if (key != "correct" && key != "wrong") fail(where + ".key", "expected correct or wrong");
  e.correct_key = key == "correct";
  if (auto b = n["body"]; b && !b.IsNull()) {
    try {
      e.body = to_json_value(b).get<InstructionBody>();
    } catch (const std::exception& ex) {
      fail(where + ".body", ex.what());
    }
  }

  auto needs = [&](bool cond, const char* what) {
    if (!cond) fail(where, std::string(to_string(e.action)) + " needs " + what);
  };
  switch (e.action) {
    case Action::FailSensor:
    case Action::RestoreSensor:
      needs(!e.node.empty() && !e.device.empty(), "node and device");
      break;
    case Action::KillNode:
    case Action::RogueConnect:
      needs(!e.node.empty(), "node");
      break;
    case Action::SetControl:
      needs(!e.node.empty() && e.body.has_value(), "node and body");
      break;
    default:
      break;
  }
  return e;
}

NetworkMode::Mode parse_mode_value(const std::string& s, const std::string& where) {
  return parse_enum(s, where, parse_mode);
}

Assertion parse_assertion(const YAML::Node& n, const std::string& where) {
  check_keys(n,
             {"kind", "expect", "to", "target", "state", "after_s", "within_s", "from", "to_s", "window_s", "count",
              "min", "device", "node", "event"},
             where);
  static const std::map<std::string, AssertionKind> kinds = {
      {"mode_sequence", AssertionKind::ModeSequence},
      {"transition_within", AssertionKind::TransitionWithin},
      {"health_state", AssertionKind::HealthState},
      {"continuous_stats", AssertionKind::ContinuousStats},
      {"min_readings", AssertionKind::MinReadings},
      {"episodes", AssertionKind::Episodes},
      {"alerts", AssertionKind::Alerts},
      {"auto_actuation", AssertionKind::AutoActuation},
      {"security_event", AssertionKind::SecurityEvent},
      {"clients_consistent", AssertionKind::ClientsConsistent},
      {"no_drops", AssertionKind::NoDrops},
      {"store_rows_match_emitted", AssertionKind::StoreRowsMatchEmitted},
  };
  auto kind = require<std::string>(n, "kind", where);
  auto it = kinds.find(kind);
  if (it == kinds.end()) fail(where + ".kind", "unknown assertion '" + kind + "'");
  Assertion a;
  a.kind = it->second;
  a.after_s = get_or<double>(n, "after_s", 0.0, where);
  a.within_s = get_or<double>(n, "within_s", 0.0, where);
  a.node = get_or<std::string>(n, "node", "", where);
  if (auto d = n["device"]; d && !d.IsNull()) {
    try {
      a.device = parse_device_id(get<std::string>(d, where + ".device"));
    } catch (const std::invalid_argument&) {
      fail(where + ".device", "expected fog/device");
    }
  }

  switch (a.kind) {
    case AssertionKind::ModeSequence: {
      auto seq = n["expect"];
      if (!seq || !seq.IsSequence() || seq.size() == 0) fail(where, "mode_sequence needs an 'expect' list");
      for (const auto& m : seq) a.modes.push_back(parse_mode_value(get<std::string>(m, where + ".expect"), where + ".expect"));
      break;
    }
    case AssertionKind::TransitionWithin:
      a.to = parse_mode_value(require<std::string>(n, "to", where), where + ".to");
      if (!n["within_s"]) fail(where, "transition_within needs within_s");
      break;
    case AssertionKind::HealthState: {
      auto target = require<std::string>(n, "target", where);
      auto slash = target.find('/');
      a.target = slash == std::string::npos ? Target::node(target)
                                            : Target{target.substr(0, slash), target.substr(slash + 1)};
      a.state = parse_enum(require<std::string>(n, "state", where), where + ".state", parse_health_state);
      if (!n["within_s"]) fail(where, "health_state needs within_s");
      break;
    }
    case AssertionKind::ContinuousStats: {
      auto from = n["from"];
      if (from && from.IsScalar() && from.Scalar() == "offline") {
        a.from_offline = true;
      } else if (from && !from.IsNull()) {
        a.from_s = get<double>(from, where + ".from");
      } else {
        a.from_s = 0.0;
      }
      if (n["to_s"]) a.to_s = get<double>(n["to_s"], where + ".to_s");
      if (n["window_s"]) a.window_s = get<double>(n["window_s"], where + ".window_s");
      break;
    }
    case AssertionKind::MinReadings:
      a.count = require<std::size_t>(n, "min", where);
      break;
    case AssertionKind::Episodes:
    case AssertionKind::Alerts:
      a.count = require<std::size_t>(n, "count", where);
      break;
    case AssertionKind::SecurityEvent:
      a.security_kind = parse_enum(require<std::string>(n, "event", where), where + ".event", parse_security_event_kind);
      a.count = get_or<std::size_t>(n, "min", 1, where);
      break;
    default:
      break;
  }
  return a;
}

}  // namespace

Scenario parse_scenario(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ScenarioError(std::string("not valid YAML: ") + e.what());
  }
  if (!root || !root.IsMap()) throw ScenarioError("scenario must be a mapping");
  check_keys(root,
             {"name", "duration_s", "tick_ms", "seed", "epoch_ms", "control", "store", "fleet", "timeline", "assertions"},
             "scenario");

  Scenario s;
  s.name = require<std::string>(root, "name", "scenario");
  s.duration_s = require<double>(root, "duration_s", "scenario");
  if (!(s.duration_s > 0)) fail("scenario.duration_s", "must be > 0");
  s.tick = std::chrono::milliseconds(get_or<std::int64_t>(root, "tick_ms", 1000, "scenario"));
  if (s.tick.count() <= 0) fail("scenario.tick_ms", "must be > 0");
  s.seed = get_or<std::uint64_t>(root, "seed", 1, "scenario");
  s.epoch_ms = get_or<std::int64_t>(root, "epoch_ms", s.epoch_ms, "scenario");

  if (auto c = root["control"]; c && !c.IsNull()) {
    check_keys(c, {"poll_timeout_ms", "failover_threshold", "node_timeout_ms", "alerts"}, "control");
    s.poll_timeout = std::chrono::milliseconds(get_or<std::int64_t>(c, "poll_timeout_ms", 2000, "control"));
    s.failover_threshold = get_or<int>(c, "failover_threshold", 3, "control");
    if (s.failover_threshold < 1) fail("control.failover_threshold", "must be >= 1");
    s.node_timeout = std::chrono::milliseconds(get_or<std::int64_t>(c, "node_timeout_ms", 5000, "control"));
    if (auto a = c["alerts"]; a && !a.IsNull()) {
      check_keys(a, {"sink", "path", "url", "from", "to"}, "control.alerts");
      s.alerts.sink = get_or<std::string>(a, "sink", "file", "control.alerts");
      if (s.alerts.sink != "file" && s.alerts.sink != "null" && s.alerts.sink != "smtp") {
        fail("control.alerts.sink", "expected file, null or smtp");
      }
      s.alerts.path = get_or<std::string>(a, "path", s.alerts.path, "control.alerts");
      s.alerts.url = get_or<std::string>(a, "url", "", "control.alerts");
      s.alerts.from = get_or<std::string>(a, "from", "", "control.alerts");
      if (auto to = a["to"]; to && to.IsSequence()) {
        for (const auto& t : to) s.alerts.to.push_back(get<std::string>(t, "control.alerts.to"));
      }
    }
  }
  if (auto st = root["store"]; st && !st.IsNull()) {
    check_keys(st, {"sync_writes", "token"}, "store");
    s.sync_writes = get_or<bool>(st, "sync_writes", false, "store");
    s.store_token = get_or<std::string>(st, "token", "", "store");
  }

  auto fleet = root["fleet"];
  if (!fleet || !fleet.IsMap()) fail("scenario", "missing 'fleet'");
  check_keys(fleet, {"generate", "nodes"}, "fleet");
  if (auto g = fleet["generate"]; g && !g.IsNull()) {
    check_keys(g, {"nodes", "devices", "push_period_s", "base_port"}, "fleet.generate");
    FleetOptions opts;
    opts.nodes = require<std::size_t>(g, "nodes", "fleet.generate");
    opts.devices_per_node = require<std::size_t>(g, "devices", "fleet.generate");
    opts.seed = s.seed;
    opts.base_port = get_or<std::uint16_t>(g, "base_port", 0, "fleet.generate");
    opts.push_period = std::chrono::seconds(get_or<std::int64_t>(g, "push_period_s", 1, "fleet.generate"));
    try {
      s.nodes = generate_fleet(opts);
    } catch (const std::exception& e) {
      fail("fleet.generate", e.what());
    }
  }
  if (auto nodes = fleet["nodes"]; nodes && !nodes.IsNull()) {
    if (!nodes.IsSequence()) fail("fleet.nodes", "expected a list");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      s.nodes.push_back(parse_node(nodes[i], s.seed, "fleet.nodes[" + std::to_string(i) + "]"));
    }
  }

  if (auto tl = root["timeline"]; tl && !tl.IsNull()) {
    if (!tl.IsSequence()) fail("timeline", "expected a list");
    for (std::size_t i = 0; i < tl.size(); ++i) {
      s.timeline.push_back(parse_event(tl[i], "timeline[" + std::to_string(i) + "]"));
    }
  }
  if (auto as = root["assertions"]; as && !as.IsNull()) {
    if (!as.IsSequence()) fail("assertions", "expected a list");
    for (std::size_t i = 0; i < as.size(); ++i) {
      s.assertions.push_back(parse_assertion(as[i], "assertions[" + std::to_string(i) + "]"));
    }
  }
  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read scenario " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

NodeFile parse_node_file(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ScenarioError(std::string("not valid YAML: ") + e.what());
  }
  if (!root || !root.IsMap()) throw ScenarioError("node file must be a mapping");
  check_keys(root, {"store_url", "store_token", "listen", "tick_ms", "seed", "node"}, "config");
  NodeFile f;
  f.store_url = get_or<std::string>(root, "store_url", "", "config");
  f.store_token = get_or<std::string>(root, "store_token", "", "config");
  f.tick = std::chrono::milliseconds(get_or<std::int64_t>(root, "tick_ms", 1000, "config"));
  if (f.tick.count() <= 0) fail("config.tick_ms", "must be > 0");
  auto seed = get_or<std::uint64_t>(root, "seed", 1, "config");
  auto node = root["node"];
  if (!node || !node.IsMap()) fail("config", "missing 'node'");
  f.node = parse_node(node, seed, "node");
  if (f.node.port == 0) f.node.port = fog::kDefaultNodePort;
  if (auto l = root["listen"]; l && !l.IsNull()) {
    check_keys(l, {"host", "port"}, "config.listen");
    f.listen_host = get_or<std::string>(l, "host", f.listen_host, "config.listen");
    f.node.port = get_or<std::uint16_t>(l, "port", f.node.port, "config.listen");
  }
  std::set<std::string> ids;
  for (const auto& d : f.node.devices) {
    if (!ids.insert(d.desc.id.device_id).second) fail("node.devices", "duplicate device id " + d.desc.id.device_id);
  }
  return f;
}

NodeFile load_node_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read node file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_node_file(buf.str());
}

void validate(const Scenario& s) {
  if (s.nodes.empty()) throw ScenarioError("fleet: no nodes");
  std::set<std::string> ids;
  for (const auto& n : s.nodes) {
    if (!ids.insert(n.fog_id).second) throw ScenarioError("fleet: duplicate node '" + n.fog_id + "'");
    std::set<std::string> devs;
    for (const auto& d : n.devices) {
      if (!devs.insert(d.desc.id.device_id).second) {
        throw ScenarioError("fleet: duplicate device '" + d.desc.id.str() + "'");
      }
    }
  }

  auto has_device = [&](const std::string& node, const std::string& device) {
    const auto* n = s.find_node(node);
    if (!n) return false;
    return std::any_of(n->devices.begin(), n->devices.end(), [&](const auto& d) { return d.desc.id.device_id == device; });
  };

  double prev = 0.0;
  std::set<std::string> rogues;
  for (std::size_t i = 0; i < s.timeline.size(); ++i) {
    const auto& e = s.timeline[i];
    auto where = "timeline[" + std::to_string(i) + "]";
    if (e.at_s < prev) throw ScenarioError(where + ": timeline not sorted by at_s");
    prev = e.at_s;
    if (e.at_s > s.duration_s) throw ScenarioError(where + ": at_s beyond duration");
    if (!e.node.empty() && !s.find_node(e.node)) throw ScenarioError(where + ": unknown node '" + e.node + "'");
    if (!e.device.empty() && !has_device(e.node, e.device)) {
      throw ScenarioError(where + ": unknown device '" + e.node + "/" + e.device + "'");
    }
    if ((e.action == Action::FailSensor || e.action == Action::RestoreSensor)) {
      const auto* n = s.find_node(e.node);
      for (const auto& d : n->devices) {
        if (d.desc.id.device_id == e.device && d.desc.kind == DeviceKind::Clock) {
          throw ScenarioError(where + ": cannot fail a clock");
        }
      }
    }
    if (e.action == Action::RogueConnect) {
      if (e.correct_key) rogues.insert(e.name);
    } else if (e.action == Action::RogueDisconnect || e.action == Action::RogueTamper ||
               e.action == Action::RogueReplay) {
      if (!rogues.count(e.name)) throw ScenarioError(where + ": no open rogue session '" + e.name + "'");
      if (e.action == Action::RogueDisconnect) rogues.erase(e.name);
    }
  }

  for (std::size_t i = 0; i < s.assertions.size(); ++i) {
    const auto& a = s.assertions[i];
    auto where = "assertions[" + std::to_string(i) + "]";
    if (a.target) {
      if (!s.find_node(a.target->fog_id)) throw ScenarioError(where + ": unknown node '" + a.target->fog_id + "'");
      if (a.target->device_id && !has_device(a.target->fog_id, *a.target->device_id)) {
        throw ScenarioError(where + ": unknown device '" + a.target->str() + "'");
      }
    }
    if (a.device && !has_device(a.device->fog_id, a.device->device_id)) {
      throw ScenarioError(where + ": unknown device '" + a.device->str() + "'");
    }
    if (!a.node.empty() && !s.find_node(a.node)) throw ScenarioError(where + ": unknown node '" + a.node + "'");
  }
}

}  // namespace fogdeck::scenario
