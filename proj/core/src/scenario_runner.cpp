#include "fogdeck/scenario_runner.hpp"

#include <httplib.h>

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "fogdeck/datastore.hpp"
#include "fogdeck/fog_node.hpp"
#include "fogdeck/messages.hpp"
#include "fogdeck/net.hpp"
#include "fogdeck/panel_api.hpp"
#include "fogdeck/store_http.hpp"

namespace fogdeck::scenario {

using namespace std::chrono_literals;

json strip_wall_clock(const json& event) {
  json out = event;
  out.erase("wall_s");
  return out;
}

namespace {

std::int64_t to_ms(double seconds) { return std::llround(seconds * 1000.0); }

std::string fmt_s(std::int64_t ms) {
  std::ostringstream os;
  os << static_cast<double>(ms) / 1000.0 << " s";
  return os.str();
}

std::filesystem::path make_temp_dir() {
  std::random_device rd;
  auto base = std::filesystem::temp_directory_path();
  for (int i = 0; i < 100; ++i) {
    auto p = base / ("fogdeck-run-" + std::to_string(rd()));
    if (std::filesystem::create_directory(p)) return p;
  }
  throw ScenarioError("cannot create a temporary directory");
}

struct Rogue {
  std::string node;
  std::unique_ptr<wire::FramedConnection> conn;
};

class Run {
 public:
  Run(const Scenario& s, const RunOptions& o) : s_(s), opts_(o), keys_(pick_keys(s, o)) {}
  ~Run() { teardown(); }

  RunResult execute();

 private:
  static KeyRing pick_keys(const Scenario& s, const RunOptions& o) {
    if (o.keys) return *o.keys;
    if (auto env = KeyRing::from_environment()) return *env;
    return KeyRing::derived("fogdeck/" + s.name + "/" + std::to_string(s.seed));
  }

  void setup();
  void teardown();
  void step_all(std::int64_t t);
  void apply(const TimelineEvent& e, std::int64_t t);
  void drain_rogues(std::int64_t t);
  void settle_clients(std::int64_t t);
  void await_error(const std::string& name, Rogue& rogue, std::int64_t t, const char* what);
  void emit(std::int64_t t, json event);
  void note(const std::string& line) {
    if (opts_.progress) *opts_.progress << line << std::endl;
  }
  std::unique_ptr<control::AlertSink> make_sink();
  void start_store();
  bool alive(const std::string& fog) const { return nodes_.count(fog) && !dead_.count(fog); }
  std::vector<AssertionResult> check_assertions();

  const Scenario& s_;
  const RunOptions& opts_;
  KeyRing keys_;
  std::filesystem::path work_dir_;
  bool temp_dir_ = false;
  std::ofstream log_;
  RunResult result_;

  std::unique_ptr<store::Datastore> ds_;
  std::unique_ptr<store::StoreServer> server_;
  std::uint16_t store_port_ = 0;
  bool store_up_ = false;

  std::vector<std::string> order_;
  std::map<std::string, std::unique_ptr<fog::FogNode>> nodes_;
  std::set<std::string> dead_;
  std::unique_ptr<control::ControlPlane> control_;
  std::unique_ptr<control::PanelServer> panel_;
  std::map<std::string, Rogue> rogues_;

  std::map<std::string, HealthState> health_prev_;
  std::map<std::string, std::vector<std::pair<std::int64_t, HealthState>>> health_hist_;
  std::map<DeviceId, std::vector<std::int64_t>> arrivals_;
  std::map<std::string, std::size_t> clients_prev_;
  std::int64_t duration_ms_ = 0;
};

void Run::emit(std::int64_t t, json event) {
  json line = {{"t_ms", t}};
  line.update(event);
  if (log_.is_open()) log_ << line.dump() << '\n' << std::flush;
  result_.events.push_back(std::move(line));
}

std::unique_ptr<control::AlertSink> Run::make_sink() {
  const auto& a = s_.alerts;
  if (a.sink == "null") return std::make_unique<control::NullSink>();
  if (a.sink == "smtp") return std::make_unique<control::SmtpSink>(control::SmtpConfig{a.url, a.from, a.to, "", "", 5000ms});
  std::filesystem::path p = a.path;
  if (p.is_relative()) p = work_dir_ / p;
  return std::make_unique<control::FileLogSink>(p);
}

void Run::start_store() {
  ds_ = std::make_unique<store::Datastore>(store::StoreOptions{work_dir_ / "store", s_.sync_writes});
  server_ = std::make_unique<store::StoreServer>(*ds_, store::StoreServerOptions{"127.0.0.1", store_port_, s_.store_token});
  server_->start();
  store_port_ = server_->port();
  store_up_ = true;
}

void Run::setup() {
  if (opts_.work_dir.empty()) {
    work_dir_ = make_temp_dir();
    temp_dir_ = !opts_.keep_work_dir;
  } else {
    work_dir_ = opts_.work_dir;
    std::filesystem::create_directories(work_dir_);
    std::filesystem::remove_all(work_dir_ / "store");
  }
  result_.work_dir = work_dir_;
  if (!opts_.log_path.empty()) {
    log_.open(opts_.log_path, std::ios::trunc);
    if (!log_) throw ScenarioError("cannot write event log " + opts_.log_path.string());
  }

  try {
    start_store();
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("datastore did not start: ") + e.what());
  }

  for (const auto& spec : s_.nodes) {
    fog::NodeConfig cfg;
    cfg.agent.fog_id = spec.fog_id;
    cfg.agent.rtc = edge::RtcSim{spec.drift_ppm, s_.epoch_ms};
    cfg.agent.buffer_capacity = spec.buffer_capacity;
    cfg.devices = spec.devices;
    cfg.store_url = server_->url();
    cfg.store_token = s_.store_token;
    cfg.listen_port = spec.port;
    cfg.key = keys_.key_for(spec.fog_id);
    auto node = std::make_unique<fog::FogNode>(std::move(cfg));
    try {
      node->start();
    } catch (const std::exception& e) {
      throw ScenarioError("node " + spec.fog_id + " did not start: " + e.what());
    }
    order_.push_back(spec.fog_id);
    nodes_[spec.fog_id] = std::move(node);
  }

  control::ControlConfig cc;
  cc.store_url = server_->url();
  cc.store_token = s_.store_token;
  cc.poll_timeout = s_.poll_timeout;
  cc.failover_threshold = s_.failover_threshold;
  cc.node_timeout = s_.node_timeout;
  cc.keys = keys_;
  cc.epoch_offset_ms = s_.epoch_ms;
  cc.info.area = s_.name;
  control_ = std::make_unique<control::ControlPlane>(cc, make_sink());

  if (opts_.panel_port) {
    panel_ = std::make_unique<control::PanelServer>(*control_, control::PanelServerOptions{"127.0.0.1", *opts_.panel_port, ""});
    try {
      panel_->start();
    } catch (const std::exception& e) {
      throw ScenarioError(std::string("panel did not start: ") + e.what());
    }
    note("panel API at " + panel_->url());
  }
}

void Run::teardown() {
  if (panel_) panel_->stop();
  panel_.reset();
  rogues_.clear();
  if (control_) control_->close_sessions();
  control_.reset();
  for (auto& [id, n] : nodes_) n->stop();
  nodes_.clear();
  if (server_) server_->stop();
  server_.reset();
  if (ds_) ds_->close();
  ds_.reset();
  if (temp_dir_) {
    std::error_code ec;
    std::filesystem::remove_all(work_dir_, ec);
    temp_dir_ = false;
  }
}

void Run::await_error(const std::string& name, Rogue& rogue, std::int64_t t, const char* what) {
  auto deadline = std::chrono::steady_clock::now() + 2s;
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left <= 0ms) {
      emit(t, {{"event", "rogue"}, {"name", name}, {"action", what}, {"reply", "none"}});
      return;
    }
    std::optional<wire::DecodedFrame> frame;
    try {
      frame = rogue.conn->receive(left);
    } catch (const std::exception& e) {
      emit(t, {{"event", "rogue"}, {"name", name}, {"action", what}, {"reply", "closed"}});
      return;
    }
    if (frame && frame->type == wire::MsgType::Error) {
      auto err = wire::error_from_payload(frame->payload);
      emit(t, {{"event", "rogue"}, {"name", name}, {"action", what}, {"reply", "error"}, {"code", err.code}});
      return;
    }
  }
}

void Run::apply(const TimelineEvent& e, std::int64_t t) {
  json ev = {{"event", "action"}, {"action", to_string(e.action)}};
  if (!e.node.empty()) ev["node"] = e.node;
  if (!e.device.empty()) ev["device"] = e.device;
  note("[" + fmt_s(t) + "] " + std::string(to_string(e.action)) + (e.node.empty() ? "" : " " + e.node) +
       (e.device.empty() ? "" : "/" + e.device));

  auto node_gone = [&] {
    ev["skipped"] = "node not running";
    emit(t, ev);
  };

  switch (e.action) {
    case Action::FailSensor:
    case Action::RestoreSensor:
      if (!alive(e.node)) return node_gone();
      nodes_[e.node]->inject_failure(e.device, e.action == Action::FailSensor);
      break;
    case Action::KillNode:
      if (!alive(e.node)) return node_gone();
      nodes_[e.node]->stop();
      dead_.insert(e.node);
      for (auto it = rogues_.begin(); it != rogues_.end();) {
        it = it->second.node == e.node ? rogues_.erase(it) : std::next(it);
      }
      break;
    case Action::StopStore:
    case Action::KillStore:
      if (!store_up_) {
        ev["skipped"] = "store not running";
        break;
      }
      if (e.action == Action::KillStore) result_.pre_kill_table = ds_->history();
      server_->stop();
      if (e.action == Action::KillStore) {
        ds_->abandon();
      } else {
        ds_->close();
      }
      store_up_ = false;
      break;
    case Action::RestoreStore:
      if (store_up_) {
        ev["skipped"] = "store already running";
        break;
      }
      server_.reset();
      ds_.reset();
      try {
        start_store();
      } catch (const std::exception& ex) {
        ev["error"] = ex.what();
        break;
      }
      result_.recovered_table = ds_->history();
      ev["recovered_rows"] = result_.recovered_table->size();
      break;
    case Action::SetControl: {
      Target target = e.device.empty() ? Target::node(e.node) : Target{e.node, e.device};
      ev["body"] = *e.body;
      try {
        auto r = control_->set_control(target, *e.body);
        ev["ok"] = r.ok;
        ev["path"] = r.path;
        if (!r.error.empty()) ev["error"] = r.error;
      } catch (const std::exception& ex) {
        ev["ok"] = false;
        ev["error"] = ex.what();
      }
      break;
    }
    case Action::CheckAll: {
      json results = json::array();
      for (const auto& r : control_->check_all_actuators()) {
        results.push_back({{"target", r.target.str()}, {"ok", r.ok}, {"path", r.path}});
      }
      ev["results"] = results;
      break;
    }
    case Action::RogueConnect: {
      if (!alive(e.node)) return node_gone();
      ev["name"] = e.name;
      ev["client_id"] = e.client_id;
      ev["key"] = e.correct_key ? "correct" : "wrong";
      auto key = e.correct_key ? keys_.key_for(e.node) : wire::PresharedKey::derive("not-the-key/" + e.node);
      try {
        auto sock = net::connect_tcp("127.0.0.1", nodes_[e.node]->port(), 1000ms);
        auto conn = wire::client_handshake(std::move(sock), key, e.client_id, 2000ms);
        rogues_[e.name] = Rogue{e.node, std::move(conn)};
        ev["result"] = "connected";
      } catch (const wire::HandshakeError& ex) {
        ev["result"] = "rejected";
      } catch (const std::exception& ex) {
        ev["result"] = "failed";
        ev["error"] = ex.what();
      }
      break;
    }
    case Action::RogueDisconnect:
      ev["name"] = e.name;
      if (auto it = rogues_.find(e.name); it != rogues_.end()) {
        it->second.conn->shutdown();
        rogues_.erase(it);
      } else {
        ev["skipped"] = "no such session";
      }
      break;
    case Action::RogueTamper:
    case Action::RogueReplay: {
      ev["name"] = e.name;
      auto it = rogues_.find(e.name);
      if (it == rogues_.end()) {
        ev["skipped"] = "no such session";
        break;
      }
      auto& conn = *it->second.conn;
      try {
        if (e.action == Action::RogueTamper) {
          auto frame = conn.encode_next(wire::MsgType::Health, {});
          frame.back() ^= 0x01;  // one bit of the tag
          conn.send_raw(frame);
        } else {
          conn.send(wire::MsgType::Health, {});
          conn.send_raw(conn.last_sent_frame());
        }
      } catch (const std::exception& ex) {
        ev["error"] = ex.what();
        break;
      }
      emit(t, ev);
      await_error(e.name, it->second, t, e.action == Action::RogueTamper ? "tamper" : "replay");
      return;
    }
  }
  emit(t, ev);
}

void Run::drain_rogues(std::int64_t t) {
  for (auto it = rogues_.begin(); it != rogues_.end();) {
    bool dead = false;
    try {
      while (it->second.conn->receive(0ms)) {
      }
    } catch (const std::exception&) {
      dead = true;
    }
    if (dead) {
      emit(t, {{"event", "rogue"}, {"name", it->first}, {"action", "closed_by_peer"}});
      it = rogues_.erase(it);
    } else {
      ++it;
    }
  }
}

void Run::settle_clients(std::int64_t t) {
  auto model = control_->panel();
  std::map<std::string, std::size_t> expected;
  for (const auto& fog : order_) {
    if (!alive(fog)) continue;
    expected[fog] = 0;
  }
  for (const auto& n : model.nodes) {
    if (n.direct && expected.count(n.fog_id)) ++expected[n.fog_id];
  }
  for (const auto& [name, r] : rogues_) {
    if (expected.count(r.node)) ++expected[r.node];
  }

  auto deadline = std::chrono::steady_clock::now() + 2s;
  std::map<std::string, std::size_t> actual;
  for (;;) {
    bool all = true;
    for (const auto& [fog, want] : expected) {
      actual[fog] = nodes_[fog]->active_clients();
      all = all && actual[fog] == want;
    }
    if (all || std::chrono::steady_clock::now() >= deadline) break;
    std::this_thread::sleep_for(2ms);
  }
  for (const auto& [fog, want] : expected) {
    bool changed = !clients_prev_.count(fog) || clients_prev_[fog] != actual[fog];
    bool mismatch = actual[fog] != want;
    if (mismatch) ++result_.client_mismatches;
    if (changed || mismatch) {
      emit(t, {{"event", "clients"}, {"node", fog}, {"active", actual[fog]}, {"expected", want}});
    }
    clients_prev_[fog] = actual[fog];
  }
}

void Run::step_all(std::int64_t t) {
  for (const auto& fog : order_) {
    if (!alive(fog)) continue;
    auto rep = nodes_[fog]->step(SimTime(t));
    for (const auto& a : rep.tick.actuations) {
      result_.actuations.push_back(TimedActuation{t, a});
      emit(t, {{"event", "actuation"},
               {"buzzer", a.buzzer.str()},
               {"automatic", a.automatic},
               {"cause", a.cause ? a.cause->str() : ""},
               {"at", a.at}});
    }
  }
  drain_rogues(t);

  auto rr = control_->refresh(SimTime(t));
  if (rr.transition) {
    emit(t, {{"event", "mode"}, {"mode", to_string(rr.transition->mode)}});
    note("[" + fmt_s(t) + "] control plane " + std::string(to_string(rr.transition->mode)));
  }
  for (const auto& r : rr.new_readings) {
    arrivals_[r.id].push_back(t);
    emit(t, {{"event", "stat"}, {"device", r.id.str()}, {"seq", r.seq}, {"value", r.value}});
  }
  for (const auto& u : rr.episodes) {
    const auto& ep = u.episode;
    emit(t, {{"event", "episode"},
             {"change", u.change == control::EpisodeChange::Opened ? "opened" : "closed"},
             {"device", ep.device.str()},
             {"id", ep.id}});
    if (u.change == control::EpisodeChange::Opened && ep.alert_sent) {
      emit(t, {{"event", "alert"}, {"device", ep.device.str()}, {"episode", ep.id}});
    }
  }
  for (const auto& e : rr.new_security) {
    emit(t, {{"event", "security"}, {"node", e.fog_id}, {"kind", to_string(e.kind)}, {"observed_at", e.observed_at}});
  }

  auto model = control_->panel();
  for (const auto& h : model.health) {
    auto key = h.subject.str();
    auto it = health_prev_.find(key);
    if (it == health_prev_.end() || it->second != h.state) {
      emit(t, {{"event", "health"}, {"target", key}, {"state", to_string(h.state)}, {"reason", h.reason}});
      health_prev_[key] = h.state;
    }
    health_hist_[key].emplace_back(t, h.state);
  }
  settle_clients(t);
}

RunResult Run::execute() {
  auto wall_start = std::chrono::steady_clock::now();
  setup();
  duration_ms_ = to_ms(s_.duration_s);
  emit(0, {{"event", "start"}, {"scenario", s_.name}, {"nodes", s_.nodes.size()}, {"seed", s_.seed}});

  std::size_t next = 0;
  auto due = [&](std::int64_t t) {
    while (!opts_.skip_timeline && next < s_.timeline.size() && to_ms(s_.timeline[next].at_s) <= t) {
      apply(s_.timeline[next++], t);
    }
  };
  for (std::int64_t t = 0; t < duration_ms_; t += s_.tick.count()) {
    due(t);
    step_all(t);
    if (opts_.speed > 0) {
      auto target = wall_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                     std::chrono::duration<double>((t + s_.tick.count()) / 1000.0 / opts_.speed));
      std::this_thread::sleep_until(target);
    }
  }
  due(duration_ms_);

  // Final flush so buffered readings land before the tables are compared.
  for (const auto& fog : order_) {
    if (alive(fog)) nodes_[fog]->flush();
  }
  control_->refresh(SimTime(duration_ms_));

  result_.store_up_at_end = store_up_;
  if (store_up_) {
    result_.final_table = ds_->history();
    result_.store_rows = ds_->reading_count();
  }
  for (const auto& fog : order_) result_.counters[fog] = nodes_[fog]->counters();
  result_.transitions = control_->transitions();
  result_.security = control_->security_feed();
  result_.episodes = control_->episodes();
  result_.alerts = control_->alerts();
  if (panel_) {
    httplib::Client client("127.0.0.1", panel_->port());
    client.set_read_timeout(5, 0);
    if (auto res = client.Get("/api/security"); res && res->status == 200) {
      result_.api_security = json::parse(res->body, nullptr, false);
    }
  }

  result_.assertions = check_assertions();
  result_.exit_code = 0;
  for (const auto& a : result_.assertions) {
    if (!a.passed) result_.exit_code = 1;
  }

  std::uint64_t emitted = 0, dropped = 0;
  for (const auto& [fog, c] : result_.counters) {
    emitted += c.emitted;
    dropped += c.dropped;
  }
  json rows = json::object();
  for (const auto& r : result_.final_table) rows[r.id.str()] = rows.value(r.id.str(), 0) + 1;
  json verdicts = json::array();
  for (const auto& a : result_.assertions) verdicts.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  result_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  emit(duration_ms_, {{"event", "summary"},
                      {"emitted", emitted},
                      {"dropped", dropped},
                      {"store_rows", result_.store_rows},
                      {"rows_per_device", rows},
                      {"assertions", verdicts},
                      {"exit_code", result_.exit_code},
                      {"wall_s", result_.wall_seconds}});
  teardown();
  return std::move(result_);
}

std::vector<AssertionResult> Run::check_assertions() {
  std::vector<AssertionResult> out;
  auto t_of = [&](const NetworkMode& m) { return m.since - s_.epoch_ms; };

  for (const auto& a : s_.assertions) {
    AssertionResult r{std::string(to_string(a.kind)), false, ""};
    std::ostringstream d;
    switch (a.kind) {
      case AssertionKind::ModeSequence: {
        std::vector<NetworkMode::Mode> got;
        for (const auto& m : result_.transitions) got.push_back(m.mode);
        r.passed = got == a.modes;
        d << "modes:";
        for (auto m : got) d << " " << to_string(m);
        break;
      }
      case AssertionKind::TransitionWithin: {
        r.name += " " + std::string(to_string(a.to));
        std::optional<std::int64_t> at;
        for (const auto& m : result_.transitions) {
          if (m.mode == a.to && t_of(m) >= to_ms(a.after_s)) {
            at = t_of(m);
            break;
          }
        }
        if (!at) {
          d << "no transition to " << to_string(a.to) << " after " << a.after_s << " s";
        } else {
          auto lag = *at - to_ms(a.after_s);
          r.passed = lag <= to_ms(a.within_s);
          d << "transition at " << fmt_s(*at) << ", " << fmt_s(lag) << " after " << a.after_s << " s (limit "
            << a.within_s << " s)";
        }
        break;
      }
      case AssertionKind::HealthState: {
        auto key = a.target->str();
        r.name += " " + key + "=" + std::string(to_string(a.state));
        std::optional<std::int64_t> at;
        for (const auto& [t, st] : health_hist_[key]) {
          if (t >= to_ms(a.after_s) && st == a.state) {
            at = t;
            break;
          }
        }
        if (!at) {
          d << key << " never " << to_string(a.state) << " after " << a.after_s << " s";
        } else {
          auto lag = *at - to_ms(a.after_s);
          r.passed = lag <= to_ms(a.within_s);
          d << key << " " << to_string(a.state) << " at " << fmt_s(*at) << " (" << fmt_s(lag) << " after, limit "
            << a.within_s << " s)";
        }
        break;
      }
      case AssertionKind::ContinuousStats: {
        std::optional<std::int64_t> from;
        if (a.from_offline) {
          for (const auto& m : result_.transitions) {
            if (m.mode == NetworkMode::Mode::Offline) {
              from = t_of(m);
              break;
            }
          }
        } else {
          from = to_ms(a.from_s.value_or(0.0));
        }
        if (!from) {
          d << "no offline transition to start from";
          break;
        }
        auto to = a.to_s ? to_ms(*a.to_s) : duration_ms_;
        r.passed = true;
        std::size_t sensors = 0;
        std::int64_t worst_gap = 0;
        for (const auto& spec : s_.nodes) {
          for (const auto& dev : spec.devices) {
            if (!is_sensor(dev.desc.kind) || !dev.desc.enabled) continue;
            ++sensors;
            auto window = a.window_s ? to_ms(*a.window_s) : 2 * std::chrono::milliseconds(dev.desc.push_period).count();
            auto prev = *from;
            bool ok = true;
            for (auto t : arrivals_[dev.desc.id]) {
              if (t < *from || t > to) continue;
              worst_gap = std::max(worst_gap, t - prev);
              if (t - prev > window) ok = false;
              prev = t;
            }
            worst_gap = std::max(worst_gap, to - prev);
            if (to - prev > window) ok = false;
            if (!ok) {
              if (r.passed) d << dev.desc.id.str() << " has a gap longer than " << fmt_s(window) << "; ";
              r.passed = false;
            }
          }
        }
        d << sensors << " sensors checked over [" << fmt_s(*from) << ", " << fmt_s(to) << "], worst gap "
          << fmt_s(worst_gap);
        break;
      }
      case AssertionKind::MinReadings: {
        std::map<DeviceId, std::size_t> rows;
        for (const auto& row : result_.final_table) ++rows[row.id];
        r.passed = true;
        std::size_t lowest = SIZE_MAX;
        for (const auto& spec : s_.nodes) {
          for (const auto& dev : spec.devices) {
            if (!is_sensor(dev.desc.kind) || !dev.desc.enabled) continue;
            lowest = std::min(lowest, rows[dev.desc.id]);
            if (rows[dev.desc.id] < a.count) r.passed = false;
          }
        }
        d << "fewest rows for a sensor: " << (lowest == SIZE_MAX ? 0 : lowest) << " (min " << a.count << ")";
        break;
      }
      case AssertionKind::Episodes: {
        std::size_t n = 0;
        for (const auto& ep : result_.episodes) n += (!a.device || ep.device == *a.device) ? 1 : 0;
        r.passed = n == a.count;
        d << n << " episodes (expected " << a.count << ")";
        break;
      }
      case AssertionKind::Alerts:
        r.passed = result_.alerts.size() == a.count;
        d << result_.alerts.size() << " alerts (expected " << a.count << ")";
        break;
      case AssertionKind::AutoActuation: {
        r.passed = !result_.episodes.empty();
        std::size_t matched = 0;
        for (const auto& ep : result_.episodes) {
          bool hit = std::any_of(result_.actuations.begin(), result_.actuations.end(), [&](const TimedActuation& ta) {
            return ta.event.automatic && ta.event.cause && *ta.event.cause == ep.device && ta.event.at == ep.started_at;
          });
          matched += hit ? 1 : 0;
          if (!hit) r.passed = false;
        }
        d << matched << " of " << result_.episodes.size() << " episode openings had a buzzer actuation";
        break;
      }
      case AssertionKind::SecurityEvent: {
        r.name += " " + std::string(to_string(a.security_kind));
        std::size_t n = 0;
        for (const auto& e : result_.security) {
          n += (e.kind == a.security_kind && (a.node.empty() || e.fog_id == a.node)) ? 1 : 0;
        }
        r.passed = n >= std::max<std::size_t>(a.count, 1);
        d << n << " " << to_string(a.security_kind) << " events";
        break;
      }
      case AssertionKind::ClientsConsistent:
        r.passed = result_.client_mismatches == 0;
        d << result_.client_mismatches << " steps where a node's active-client count differed from open connections";
        break;
      case AssertionKind::NoDrops: {
        std::uint64_t dropped = 0;
        for (const auto& [fog, c] : result_.counters) dropped += c.dropped;
        r.passed = dropped == 0;
        d << dropped << " readings dropped";
        break;
      }
      case AssertionKind::StoreRowsMatchEmitted: {
        std::uint64_t emitted = 0, dropped = 0;
        for (const auto& [fog, c] : result_.counters) {
          emitted += c.emitted;
          dropped += c.dropped;
        }
        if (!result_.store_up_at_end) {
          d << "datastore not running at the end";
          break;
        }
        r.passed = result_.store_rows == emitted - dropped;
        d << "store rows " << result_.store_rows << ", emitted " << emitted << ", dropped " << dropped;
        break;
      }
    }
    r.detail = d.str();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
  Run run(scenario, options);
  return run.execute();
}

}  // namespace fogdeck::scenario
