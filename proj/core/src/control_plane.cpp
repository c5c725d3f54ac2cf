#include "fogdeck/control_plane.hpp"

#include <algorithm>

#include "fogdeck/messages.hpp"
#include "fogdeck/net.hpp"
#include "fogdeck/store_http.hpp"
#include "spdlog/spdlog.h"

namespace fogdeck::control {

using namespace std::chrono_literals;

namespace {

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> opt_get(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

void to_json(json& j, const PanelInfo& v) {
  j = json{{"operator", v.operator_name}, {"application", v.application}, {"area", v.area}};
}

void from_json(const json& j, PanelInfo& v) {
  v.operator_name = j.value("operator", std::string{});
  v.application = j.value("application", std::string{});
  v.area = j.value("area", std::string{});
}

void to_json(json& j, const StatsRow& v) {
  j = json{{"id", v.id},
           {"kind", to_string(v.kind)},
           {"location", v.location},
           {"value", opt(v.value)},
           {"unit", v.unit ? json(to_string(*v.unit)) : json(nullptr)},
           {"timestamp", opt(v.timestamp)},
           {"seq", v.seq},
           {"indicator", to_string(v.indicator)}};
}

void from_json(const json& j, StatsRow& v) {
  j.at("id").get_to(v.id);
  v.kind = parse_device_kind(j.at("kind").get<std::string>());
  v.location = j.value("location", std::string{});
  v.value = opt_get<double>(j, "value");
  auto unit = opt_get<std::string>(j, "unit");
  v.unit = unit ? std::optional(parse_unit(*unit)) : std::nullopt;
  v.timestamp = opt_get<TimestampMs>(j, "timestamp");
  v.seq = j.value("seq", std::uint64_t{0});
  v.indicator = parse_indicator(j.at("indicator").get<std::string>());
}

void to_json(json& j, const NodeSummary& v) {
  j = json{{"fog_id", v.fog_id},         {"endpoint", v.endpoint},
           {"state", to_string(v.state)}, {"reason", v.reason},
           {"cloud_mode", v.cloud_mode},  {"active_clients", v.active_clients},
           {"last_seen", v.last_seen},    {"direct", v.direct}};
}

void from_json(const json& j, NodeSummary& v) {
  j.at("fog_id").get_to(v.fog_id);
  v.endpoint = j.value("endpoint", std::string{});
  v.state = parse_health_state(j.at("state").get<std::string>());
  v.reason = j.value("reason", std::string{});
  v.cloud_mode = j.value("cloud_mode", std::string{});
  v.active_clients = j.value("active_clients", std::size_t{0});
  v.last_seen = j.value("last_seen", TimestampMs{0});
  v.direct = j.value("direct", false);
}

void to_json(json& j, const PendingChange& v) {
  j = json{{"target", v.target},
           {"body", v.body},
           {"path", v.path},
           {"instr_id", opt(v.instr_id)},
           {"issued_at", v.issued_at}};
}

void from_json(const json& j, PendingChange& v) {
  j.at("target").get_to(v.target);
  j.at("body").get_to(v.body);
  v.path = j.value("path", std::string{});
  v.instr_id = opt_get<std::uint64_t>(j, "instr_id");
  v.issued_at = j.value("issued_at", TimestampMs{0});
}

void to_json(json& j, const BreachEpisode& v) {
  j = json{{"id", v.id},
           {"device", v.device},
           {"started_at", v.started_at},
           {"ended_at", opt(v.ended_at)},
           {"peak_value", v.peak_value},
           {"alert_sent", v.alert_sent}};
}

void from_json(const json& j, BreachEpisode& v) {
  v.id = j.value("id", std::uint64_t{0});
  j.at("device").get_to(v.device);
  j.at("started_at").get_to(v.started_at);
  v.ended_at = opt_get<TimestampMs>(j, "ended_at");
  j.at("peak_value").get_to(v.peak_value);
  v.alert_sent = j.value("alert_sent", false);
}

void to_json(json& j, const DispatchRecord& v) {
  j = json{{"device", v.alert.device}, {"episode", v.alert.episode}, {"value", v.alert.value},
           {"at", v.alert.at},         {"sink", v.sink},               {"delivered", v.delivered},
           {"error", v.error}};
}

void to_json(json& j, const PanelModel& v) {
  j = json{{"info", v.info},
           {"health", v.health},
           {"network", v.network},
           {"transitions", v.transitions},
           {"stats", v.stats},
           {"controls", v.controls},
           {"actuators", v.actuators},
           {"nodes", v.nodes},
           {"episodes", v.episodes},
           {"security", v.security},
           {"alerts_dispatched", v.alerts_dispatched},
           {"pending", v.pending},
           {"generated_at", v.generated_at}};
}

void from_json(const json& j, PanelModel& v) {
  j.at("info").get_to(v.info);
  j.at("health").get_to(v.health);
  j.at("network").get_to(v.network);
  v.transitions = j.value("transitions", std::vector<NetworkMode>{});
  j.at("stats").get_to(v.stats);
  j.at("controls").get_to(v.controls);
  v.actuators = j.value("actuators", std::vector<ActuatorState>{});
  v.nodes = j.value("nodes", std::vector<NodeSummary>{});
  v.episodes = j.value("episodes", std::vector<BreachEpisode>{});
  v.security = j.value("security", std::vector<SecurityEvent>{});
  v.alerts_dispatched = j.value("alerts_dispatched", std::size_t{0});
  v.pending = j.value("pending", std::vector<PendingChange>{});
  v.generated_at = j.value("generated_at", TimestampMs{0});
}

void to_json(json& j, const ControlResult& v) {
  j = json{{"target", v.target}, {"ok", v.ok}, {"path", v.path}, {"instr_id", opt(v.instr_id)}, {"error", v.error}};
}

struct ControlPlane::Session {
  std::unique_ptr<wire::FramedConnection> conn;
  std::int64_t last_health_tick = -1;
};

ControlPlane::ControlPlane(ControlConfig config, std::unique_ptr<AlertSink> sink)
    : config_(std::move(config)), notifier_(std::move(sink)) {
  if (config_.failover_threshold < 1) throw std::invalid_argument("failover threshold must be >= 1");
  if (!config_.store_url.empty()) {
    store_ = std::make_unique<store::StoreClient>(config_.store_url, config_.store_token, config_.poll_timeout);
  }
  mode_ = NetworkMode{NetworkMode::Mode::Online, clock(now_), "start"};
  transitions_.push_back(mode_);
  std::lock_guard lock(mutex_);
  publish_locked();
}

ControlPlane::~ControlPlane() { close_sessions(); }

void ControlPlane::go_mode_locked(NetworkMode::Mode mode, const std::string& cause, RefreshReport& report) {
  if (mode_.mode == mode) return;
  mode_ = NetworkMode{mode, clock(now_), cause};
  transitions_.push_back(mode_);
  report.transition = mode_;
  spdlog::info("control plane now {} ({})", to_string(mode), cause);
}

bool ControlPlane::poll_store_locked(RefreshReport& report) {
  if (!store_) return false;
  std::vector<store::NodeRecord> nodes;
  std::vector<SensorReading> stats;
  std::vector<NodeReport> reports;
  std::vector<SecurityEvent> security;
  try {
    nodes = store_->nodes();
    stats = store_->stats();
    reports = store_->reports();
    security = store_->security();
  } catch (const std::exception& e) {
    ++consecutive_failures_;
    if (mode_.mode == NetworkMode::Mode::Online && consecutive_failures_ >= config_.failover_threshold) {
      go_mode_locked(NetworkMode::Mode::Offline, std::string("datastore unreachable: ") + e.what(), report);
    }
    return false;
  }

  consecutive_failures_ = 0;
  if (mode_.mode == NetworkMode::Mode::Offline) {
    go_mode_locked(NetworkMode::Mode::Online, "datastore reachable", report);
    for (auto& [fog, s] : sessions_) s->conn->shutdown();
    sessions_.clear();
    dial_errors_.clear();
  }
  for (auto& n : nodes) {
    auto& seen = last_seen_[n.fog_id];
    seen = std::max(seen, n.last_seen);
    registry_[n.fog_id] = std::move(n);
  }
  for (auto& r : reports) {
    auto& seen = last_seen_[r.fog_id];
    seen = std::max(seen, r.reported_at);
    auto& slot = reports_[r.fog_id];
    if (r.reported_at >= slot.reported_at) slot = std::move(r);
  }
  std::sort(stats.begin(), stats.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (const auto& r : stats) observe_reading_locked(r, report);
  merge_security_locked(security, report);
  return true;
}

void ControlPlane::observe_reading_locked(const SensorReading& r, RefreshReport& report) {
  auto it = latest_.find(r.id);
  if (it != latest_.end() && it->second.seq >= r.seq) return;
  latest_[r.id] = r;
  report.new_readings.push_back(r);
  auto desc = find_device_locked(Target::device(r.id));
  if (desc && desc->threshold) {
    if (auto update = tracker_.observe(r, *desc->threshold, desc->email_alerts, &notifier_)) {
      report.episodes.push_back(*update);
    }
  }
}

void ControlPlane::merge_security_locked(const std::vector<SecurityEvent>& events, RefreshReport& report) {
  for (const auto& e : events) {
    if (security_.insert(e).second) report.new_security.push_back(e);
  }
}

void ControlPlane::dial_locked(const std::string& fog_id) {
  auto reg = registry_.find(fog_id);
  if (reg == registry_.end() || reg->second.endpoint.empty()) {
    dial_errors_[fog_id] = "no cached endpoint";
    return;
  }
  const auto& ep = reg->second.endpoint;
  auto colon = ep.rfind(':');
  if (colon == std::string::npos) {
    dial_errors_[fog_id] = "bad endpoint " + ep;
    return;
  }
  try {
    auto host = ep.substr(0, colon);
    auto port = static_cast<std::uint16_t>(std::stoul(ep.substr(colon + 1)));
    auto sock = net::connect_tcp(host, port, config_.dial_timeout);
    auto session = std::make_unique<Session>();
    session->conn = wire::client_handshake(std::move(sock), config_.keys.key_for(fog_id), config_.client_id,
                                           config_.ack_timeout);
    sessions_[fog_id] = std::move(session);
    dial_errors_.erase(fog_id);
  } catch (const std::exception& e) {
    dial_errors_[fog_id] = e.what();
  }
}

void ControlPlane::handle_frame_locked(const std::string& fog_id, Session& session, std::uint8_t type,
                                       const std::vector<std::uint8_t>& payload, RefreshReport& report) {
  switch (static_cast<wire::MsgType>(type)) {
    case wire::MsgType::ReadingBatch: {
      auto batch = wire::reading_batch_from_payload(payload);
      for (const auto& r : batch.readings) observe_reading_locked(r, report);
      break;
    }
    case wire::MsgType::Health: {
      auto h = wire::health_from_payload(payload);
      session.last_health_tick = std::max(session.last_health_tick, h.tick_ms);
      auto& seen = last_seen_[fog_id];
      seen = std::max(seen, h.report.reported_at);
      if (!h.report.devices.empty()) registry_[fog_id].devices = h.report.devices;
      reports_[fog_id] = std::move(h.report);
      merge_security_locked(h.security, report);
      break;
    }
    default:
      break;  // stale Acks and Errors
  }
}

void ControlPlane::drain_locked(const std::string& fog_id, Session& session, SimTime now, RefreshReport& report) {
  auto deadline = std::chrono::steady_clock::now() + config_.heartbeat_wait;
  for (;;) {
    bool waiting = session.last_health_tick < now.count();
    auto left = waiting ? std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now())
                        : 0ms;
    if (left < 0ms) left = 0ms;
    auto frame = session.conn->receive(left);
    if (!frame) {
      if (!waiting || std::chrono::steady_clock::now() >= deadline) return;
      continue;
    }
    try {
      handle_frame_locked(fog_id, session, static_cast<std::uint8_t>(frame->type), frame->payload, report);
    } catch (const std::invalid_argument& e) {
      spdlog::warn("control plane: bad frame from {}: {}", fog_id, e.what());
    }
  }
}

RefreshReport ControlPlane::refresh(SimTime now) {
  std::lock_guard lock(mutex_);
  now_ = now;
  RefreshReport report;
  report.poll_ok = poll_store_locked(report);

  if (!report.poll_ok && mode_.mode == NetworkMode::Mode::Offline) {
    for (const auto& [fog_id, rec] : registry_) {
      if (!sessions_.count(fog_id)) dial_locked(fog_id);
      auto it = sessions_.find(fog_id);
      if (it == sessions_.end()) continue;
      try {
        drain_locked(fog_id, *it->second, now, report);
      } catch (const std::exception& e) {
        dial_errors_[fog_id] = std::string("direct session lost: ") + e.what();
        it->second->conn->shutdown();
        sessions_.erase(it);
      }
    }
  }
  publish_locked();
  return report;
}

std::vector<DeviceDescriptor> ControlPlane::node_devices_locked(const std::string& fog_id) const {
  if (auto r = reports_.find(fog_id); r != reports_.end() && !r->second.devices.empty()) return r->second.devices;
  if (auto n = registry_.find(fog_id); n != registry_.end()) return n->second.devices;
  return {};
}

std::optional<DeviceDescriptor> ControlPlane::find_device_locked(const Target& target) const {
  if (!target.device_id) return std::nullopt;
  for (auto& d : node_devices_locked(target.fog_id)) {
    if (d.id.device_id == *target.device_id) return d;
  }
  return std::nullopt;
}

ControlResult ControlPlane::set_control_locked(const Target& target, const InstructionBody& body) {
  std::optional<DeviceKind> kind;
  if (target.device_id) {
    auto desc = find_device_locked(target);
    if (!desc) throw UnknownDeviceError(target.str());
    kind = desc->kind;
  } else if (!registry_.count(target.fog_id) && !reports_.count(target.fog_id)) {
    throw UnknownDeviceError(target.str());
  }
  auto violations = validate_body(body, kind);
  if (!violations.empty()) throw ValidationError(violations, "control change not valid for " + target.str());

  ControlResult result{target, false, "", std::nullopt, ""};
  Instruction instr{0, target, body, clock(now_)};
  if (mode_.mode == NetworkMode::Mode::Online) {
    result.path = "datastore";
    try {
      result.instr_id = store_->append_instruction(instr);
      result.ok = true;
    } catch (const std::exception& e) {
      result.error = e.what();
    }
  } else {
    result.path = "direct";
    if (!sessions_.count(target.fog_id)) dial_locked(target.fog_id);
    auto it = sessions_.find(target.fog_id);
    if (it == sessions_.end()) throw OfflineNodeUnreachable(target.fog_id, dial_errors_[target.fog_id]);
    auto& session = *it->second;
    auto request_id = next_request_id_++;
    RefreshReport ignored;
    try {
      session.conn->send(wire::MsgType::Instruction, wire::to_payload(wire::InstructionMsg{request_id, instr}));
      auto deadline = std::chrono::steady_clock::now() + config_.ack_timeout;
      for (;;) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left <= 0ms) throw OfflineNodeUnreachable(target.fog_id, "no ack within timeout");
        auto frame = session.conn->receive(left);
        if (!frame) continue;
        if (frame->type == wire::MsgType::Ack) {
          auto ack = wire::ack_from_payload(frame->payload);
          if (ack.request_id != request_id) continue;
          result.ok = ack.ok;
          if (!ack.ok) result.error = ack.message;
          break;
        }
        handle_frame_locked(target.fog_id, session, static_cast<std::uint8_t>(frame->type), frame->payload, ignored);
      }
    } catch (const OfflineNodeUnreachable&) {
      throw;
    } catch (const std::exception& e) {
      session.conn->shutdown();
      sessions_.erase(it);
      dial_errors_[target.fog_id] = e.what();
      throw OfflineNodeUnreachable(target.fog_id, e.what());
    }
  }
  if (result.ok) {
    pending_.push_back(PendingChange{target, body, result.path, result.instr_id, instr.issued_at});
    if (pending_.size() > 50) pending_.erase(pending_.begin());
  }
  return result;
}

ControlResult ControlPlane::set_control(const Target& target, const InstructionBody& body) {
  std::lock_guard lock(mutex_);
  auto result = set_control_locked(target, body);
  publish_locked();
  return result;
}

std::vector<ControlResult> ControlPlane::check_all_actuators() {
  std::lock_guard lock(mutex_);
  const ActuatorCommand self_test{3.3, 1000.0, 500};
  std::set<std::string> fogs;
  for (const auto& [fog, rec] : registry_) fogs.insert(fog);
  for (const auto& [fog, rep] : reports_) fogs.insert(fog);

  std::vector<ControlResult> out;
  for (const auto& fog : fogs) {
    // A queued self-test proves nothing; a node that stopped reporting fails it.
    auto seen = last_seen_.find(fog);
    bool stale = seen == last_seen_.end() || clock(now_) - seen->second > config_.node_timeout.count();
    for (const auto& d : node_devices_locked(fog)) {
      if (d.kind != DeviceKind::BuzzerActuator) continue;
      auto target = Target::device(d.id);
      if (mode_.mode == NetworkMode::Mode::Online && stale) {
        out.push_back(ControlResult{target, false, "datastore", std::nullopt, "node unreachable"});
        continue;
      }
      try {
        out.push_back(set_control_locked(target, self_test));
      } catch (const std::exception& e) {
        out.push_back(ControlResult{target, false, mode_.mode == NetworkMode::Mode::Online ? "datastore" : "direct",
                                    std::nullopt, e.what()});
      }
    }
  }
  publish_locked();
  return out;
}

PanelModel ControlPlane::build_panel_locked() const {
  PanelModel m;
  m.info = config_.info;
  m.network = mode_;
  m.transitions = transitions_;
  m.generated_at = clock(now_);
  auto now_ms = clock(now_);
  bool offline = mode_.mode == NetworkMode::Mode::Offline;

  std::set<std::string> fogs;
  for (const auto& [fog, rec] : registry_) fogs.insert(fog);
  for (const auto& [fog, rep] : reports_) fogs.insert(fog);

  for (const auto& fog : fogs) {
    NodeSummary node;
    node.fog_id = fog;
    if (auto r = registry_.find(fog); r != registry_.end()) node.endpoint = r->second.endpoint;
    if (auto s = last_seen_.find(fog); s != last_seen_.end()) node.last_seen = s->second;
    const NodeReport* report = nullptr;
    if (auto r = reports_.find(fog); r != reports_.end()) report = &r->second;
    node.direct = sessions_.count(fog) > 0;

    std::string unreachable;
    if (offline && !node.direct) {
      auto e = dial_errors_.find(fog);
      unreachable = "offline, no direct session: " + (e != dial_errors_.end() ? e->second : std::string("not dialed"));
    } else if (now_ms - node.last_seen > config_.node_timeout.count()) {
      unreachable = "no contact for " + std::to_string(now_ms - node.last_seen) + " ms";
    }

    if (report) {
      node.cloud_mode = report->cloud_mode;
      node.active_clients = report->active_clients;
      for (const auto& a : report->actuators) m.actuators.push_back(a);
    }
    node.state = unreachable.empty() ? HealthState::Healthy : HealthState::Unreachable;
    node.reason = unreachable.empty() ? node.cloud_mode : unreachable;
    if (unreachable.empty() && report) {
      for (const auto& h : report->health) {
        if (!h.subject.is_device()) {
          node.state = h.state;
          node.reason = h.reason;
        }
      }
    }
    m.nodes.push_back(node);
    m.health.push_back(HealthStatus{Target::node(fog), node.state, node.reason, node.last_seen});

    for (const auto& d : node_devices_locked(fog)) {
      m.controls.push_back(d);
      HealthStatus h{Target::device(d.id), HealthState::Healthy, "", node.last_seen};
      if (!unreachable.empty()) {
        h.state = HealthState::Unreachable;
        h.reason = "node unreachable";
      } else if (report) {
        for (const auto& rh : report->health) {
          if (rh.subject == h.subject) h = rh;
        }
      }
      m.health.push_back(h);

      if (!is_sensor(d.kind)) continue;
      StatsRow row;
      row.id = d.id;
      row.kind = d.kind;
      row.location = d.location.label;
      row.unit = d.unit;
      std::optional<SensorReading> latest;
      if (auto l = latest_.find(d.id); l != latest_.end()) latest = l->second;
      if (latest) {
        row.value = latest->value;
        row.unit = latest->unit;
        row.timestamp = latest->timestamp;
        row.seq = latest->seq;
      }
      row.indicator = indicator_color(latest, d);
      m.stats.push_back(row);
    }
  }

  m.episodes = tracker_.episodes();
  m.security.assign(security_.begin(), security_.end());
  std::stable_sort(m.security.begin(), m.security.end(),
                   [](const auto& a, const auto& b) { return a.observed_at < b.observed_at; });
  m.alerts_dispatched = notifier_.records().size();
  m.pending = pending_;
  return m;
}

void ControlPlane::publish_locked() {
  auto model = build_panel_locked();
  json j = model;
  j.erase("generated_at");
  auto text = j.dump();
  snapshot_ = std::move(model);
  if (text != last_published_) {
    last_published_ = std::move(text);
    ++revision_;
    revision_cv_.notify_all();
  }
}

PanelModel ControlPlane::panel() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

NetworkMode ControlPlane::mode() const {
  std::lock_guard lock(mutex_);
  return mode_;
}

std::vector<NetworkMode> ControlPlane::transitions() const {
  std::lock_guard lock(mutex_);
  return transitions_;
}

std::vector<SecurityEvent> ControlPlane::security_feed() const {
  std::lock_guard lock(mutex_);
  return snapshot_.security;
}

std::vector<DispatchRecord> ControlPlane::alerts() const { return notifier_.records(); }

std::vector<BreachEpisode> ControlPlane::episodes() const {
  std::lock_guard lock(mutex_);
  return tracker_.episodes();
}

std::size_t ControlPlane::direct_sessions() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

void ControlPlane::close_sessions() {
  std::lock_guard lock(mutex_);
  for (auto& [fog, s] : sessions_) s->conn->shutdown();
  sessions_.clear();
}

std::uint64_t ControlPlane::revision() const {
  std::lock_guard lock(mutex_);
  return revision_;
}

std::uint64_t ControlPlane::wait_for_revision(std::uint64_t after, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  revision_cv_.wait_for(lock, timeout, [&] { return revision_ > after; });
  return revision_;
}

}  // namespace fogdeck::control
