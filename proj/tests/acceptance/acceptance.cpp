// Acceptance suite: one PASS/FAIL line per criterion. Scenario criteria run the
// shipped scenario files through the in-process runner at unthrottled speed.
//
//   fogdeck_acceptance --scenarios <dir> [--only name]

#include <chrono>
#include <filesystem>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "fogdeck/datastore.hpp"
#include "fogdeck/edge.hpp"
#include "fogdeck/fog_agent.hpp"
#include "fogdeck/scenario.hpp"
#include "fogdeck/scenario_runner.hpp"
#include "fogdeck/wire.hpp"

using namespace fogdeck;
using namespace fogdeck::scenario;

namespace {

// Pinned tolerances.
constexpr std::int64_t kPollBudgetMs = 3 * 2000;   // failover_threshold x poll timeout
constexpr std::int64_t kDialBudgetMs = 1000;
constexpr std::int64_t kTickMs = 1000;             // one poll / refresh per tick
constexpr double kFailoverWallLimitS = 30.0;
constexpr double kScaleWallLimitS = 120.0;
constexpr std::int64_t kRtcExpectedOffsetMs = 63'072;
constexpr std::int64_t kRtcToleranceMs = 1;

struct Outcome {
  bool pass = true;
  std::ostringstream why;

  void check(bool cond, const std::string& what) {
    if (!cond) {
      if (!pass) why << "; ";
      why << what;
      pass = false;
    }
  }
};

std::filesystem::path g_dir;

RunResult run(const std::string& file, bool skip_timeline = false, std::optional<std::uint16_t> panel = std::nullopt) {
  RunOptions o;
  o.skip_timeline = skip_timeline;
  o.panel_port = panel;
  return run_scenario(load_scenario(g_dir / file), o);
}

using RowKey = std::tuple<std::string, std::uint64_t, double, TimestampMs>;

std::set<RowKey> as_set(const std::vector<SensorReading>& rows, const std::string& skip_device = "") {
  std::set<RowKey> out;
  for (const auto& r : rows) {
    if (!skip_device.empty() && r.id.str() == skip_device) continue;
    out.insert({r.id.str(), r.seq, r.value, r.timestamp});
  }
  return out;
}

std::int64_t offset_ms(const NetworkMode& m, std::int64_t epoch) { return m.since - epoch; }

// First t_ms >= after at which `target` was reported in `state`.
std::optional<std::int64_t> health_at(const RunResult& r, const std::string& target, const std::string& state,
                                      std::int64_t after) {
  for (const auto& e : r.events) {
    if (e.value("event", "") == "health" && e.value("target", "") == target && e.value("state", "") == state &&
        e["t_ms"].get<std::int64_t>() >= after) {
      return e["t_ms"].get<std::int64_t>();
    }
  }
  return std::nullopt;
}

Outcome failover() {
  Outcome o;
  auto s = load_scenario(g_dir / "failover.yaml");
  auto r = run("failover.yaml");
  auto base = run("failover.yaml", true);

  std::size_t to_offline = 0;
  std::optional<std::int64_t> offline_at, online_at;
  for (std::size_t i = 1; i < r.transitions.size(); ++i) {
    const auto& m = r.transitions[i];
    if (m.mode == NetworkMode::Mode::Offline && r.transitions[i - 1].mode == NetworkMode::Mode::Online) {
      ++to_offline;
      if (!offline_at) offline_at = offset_ms(m, s.epoch_ms);
    }
    if (m.mode == NetworkMode::Mode::Online && offset_ms(m, s.epoch_ms) >= 90'000 && !online_at) {
      online_at = offset_ms(m, s.epoch_ms);
    }
  }
  o.check(to_offline == 1, std::to_string(to_offline) + " Online->Offline transitions");
  if (offline_at) {
    o.why << "offline " << (*offline_at - 30'000) << " ms after stop";
    o.check(*offline_at - 30'000 <= kPollBudgetMs + kDialBudgetMs, " (budget exceeded)");
  }
  o.check(online_at && *online_at - 90'000 <= kTickMs, "not Online within one poll of the restore");
  if (online_at) o.why << ", online " << (*online_at - 90'000) << " ms after restore";

  // per-sensor stats arrivals during the offline period
  std::map<std::string, std::vector<std::int64_t>> arrivals;
  for (const auto& e : r.events) {
    if (e.value("event", "") == "stat") arrivals[e["device"]].push_back(e["t_ms"]);
  }
  std::int64_t worst = 0;
  std::size_t sensors = 0;
  for (const auto& n : s.nodes) {
    for (const auto& d : n.devices) {
      if (!is_sensor(d.desc.kind) || !d.desc.enabled || !offline_at) continue;
      ++sensors;
      auto window = 2 * std::chrono::milliseconds(d.desc.push_period).count();
      auto prev = *offline_at;
      for (auto t : arrivals[d.desc.id.str()]) {
        if (t <= *offline_at || t > 90'000) continue;
        worst = std::max(worst, t - prev);
        prev = t;
      }
      worst = std::max(worst, 90'000 - prev);
      o.check(worst <= window, d.desc.id.str() + " silent longer than 2 x push period while offline");
    }
  }
  o.why << ", worst stats gap " << worst << " ms over " << sensors << " sensors";

  auto got = as_set(r.final_table);
  auto want = as_set(base.final_table);
  o.check(got == want, "final table differs from the always-online run (" + std::to_string(got.size()) + " vs " +
                           std::to_string(want.size()) + " rows)");
  o.why << ", " << got.size() << " rows match baseline";
  o.check(r.wall_seconds < kFailoverWallLimitS, "runtime over 30 s");
  o.why << ", wall " << r.wall_seconds << " s";
  return o;
}

Outcome edge_failure() {
  Outcome o;
  auto s = load_scenario(g_dir / "edge_failure.yaml");
  auto r = run("edge_failure.yaml");
  auto base = run("edge_failure.yaml", true);
  const std::string failed = "fog-1/sensor-1";
  std::int64_t period = 0;
  for (const auto& d : s.nodes[0].devices) {
    if (d.desc.id.str() == failed) period = std::chrono::milliseconds(d.desc.push_period).count();
  }
  auto faulty = health_at(r, failed, "faulty", 30'000);
  o.check(faulty && *faulty - 30'000 <= 2 * period + kTickMs, "sensor-1 not Faulty within 2 x push period + refresh");
  if (faulty) o.why << "faulty " << (*faulty - 30'000) << " ms after failure";
  auto healthy = health_at(r, failed, "healthy", 60'000);
  o.check(healthy && *healthy - 60'000 <= kTickMs, "sensor-1 not Healthy within one tick of restoration");
  if (healthy) o.why << ", healthy " << (*healthy - 60'000) << " ms after restore";

  auto others = as_set(r.final_table, failed);
  auto others_base = as_set(base.final_table, failed);
  std::size_t missing = 0;
  for (const auto& row : others_base) missing += others.count(row) ? 0 : 1;
  o.check(missing == 0 && others == others_base, std::to_string(missing) + " readings of other devices differ");
  o.why << ", other devices " << others.size() << "/" << others_base.size() << " rows identical to no-failure run";
  return o;
}

Outcome threshold_alert() {
  Outcome o;
  auto on = run("threshold_alert.yaml");
  auto off = run("threshold_alert_quiet.yaml");
  o.check(on.episodes.size() == 2, std::to_string(on.episodes.size()) + " episodes with alerts on");
  o.check(off.episodes.size() == 2, std::to_string(off.episodes.size()) + " episodes with alerts off");
  o.check(on.alerts.size() == 2, std::to_string(on.alerts.size()) + " alerts with email on");
  o.check(off.alerts.empty(), std::to_string(off.alerts.size()) + " alerts with email off");
  std::size_t edges = 0, actuated = 0;
  for (const auto* res : {&on, &off}) {
    for (const auto& ep : res->episodes) {
      ++edges;
      for (const auto& a : res->actuations) {
        if (a.event.automatic && a.event.cause == ep.device && a.event.at == ep.started_at) {
          ++actuated;
          break;
        }
      }
    }
  }
  o.check(edges == actuated, "buzzer not activated at every Normal->Abnormal edge");
  o.why << on.episodes.size() << "+" << off.episodes.size() << " episodes, " << on.alerts.size() << "/"
        << off.alerts.size() << " alerts (on/off), buzzer at " << actuated << "/" << edges << " edges";
  return o;
}

Outcome security() {
  Outcome o;
  auto r = run("security.yaml", false, std::uint16_t{0});
  std::set<std::string> api_kinds;
  if (r.api_security && r.api_security->contains("events")) {
    for (const auto& e : (*r.api_security)["events"]) api_kinds.insert(e.value("kind", ""));
  }
  for (const char* k : {"unknown_client_connected", "auth_failure", "frame_tampered", "replay_detected"}) {
    o.check(api_kinds.count(k) == 1, std::string(k) + " missing from GET /api/security");
  }
  o.check(r.client_mismatches == 0, std::to_string(r.client_mismatches) + " steps with a wrong active-client count");

  // wrong-key attempt at t = 10 s must leave the count where it was
  std::optional<std::size_t> before, after;
  for (const auto& e : r.events) {
    if (e.value("event", "") != "clients") continue;
    auto t = e["t_ms"].get<std::int64_t>();
    if (t < 10'000) before = e["active"].get<std::size_t>();
    if (t == 10'000) after = e["active"].get<std::size_t>();
  }
  o.check(before && *before == 1 && !after, "active-client count changed on the wrong-key attempt");
  o.why << api_kinds.size() << "/4 event kinds via API, " << r.client_mismatches << " count mismatches";
  return o;
}

Outcome protocol() {
  Outcome o;
  using namespace fogdeck::wire;
  std::mt19937_64 rng(424242);
  auto key = PresharedKey::random();
  std::size_t roundtrips = 0, bad = 0;
  for (std::uint64_t i = 1; i <= 10'000; ++i) {
    std::vector<std::uint8_t> p(rng() % 2048);
    for (auto& b : p) b = static_cast<std::uint8_t>(rng());
    auto type = static_cast<MsgType>(1 + rng() % 6);
    auto f = encode_frame(type, p, key, i);
    if (f.size() != kFrameOverhead + p.size()) ++bad;
    auto d = decode_frame(f, key, i - 1);
    if (d.payload != p || d.type != type || d.counter != i) ++bad;
    ++roundtrips;
  }
  o.check(bad == 0, std::to_string(bad) + " round-trip or length mismatches");
  o.check(encode_frame(MsgType::Ack, {}, key, 1).size() == 36, "empty frame is not 36 bytes");

  std::size_t flips = 0, accepted = 0;
  for (std::size_t n = 0; n + kFrameOverhead <= 64; ++n) {
    std::vector<std::uint8_t> p(n);
    for (auto& b : p) b = static_cast<std::uint8_t>(rng());
    auto f = encode_frame(MsgType::ReadingBatch, p, key, 1);
    for (std::size_t bit = 0; bit < f.size() * 8; ++bit) {
      auto t = f;
      t[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      ++flips;
      try {
        decode_frame(t, key, 0);
        ++accepted;
      } catch (const FrameError&) {
      }
    }
  }
  o.check(accepted == 0, std::to_string(accepted) + " tampered frames accepted");
  o.why << roundtrips << " round-trips, " << flips << " single-bit flips rejected " << (flips - accepted) << "/"
        << flips;
  return o;
}

Outcome scale() {
  Outcome o;
  auto r = run("scale.yaml");
  std::uint64_t emitted = 0, dropped = 0;
  std::size_t silent_nodes = 0;
  for (const auto& [fog, c] : r.counters) {
    emitted += c.emitted;
    dropped += c.dropped;
    silent_nodes += c.emitted == 0 ? 1 : 0;
  }
  o.check(r.counters.size() == 100, std::to_string(r.counters.size()) + " nodes");
  o.check(r.store_rows == emitted - dropped, "store rows != emitted - dropped");
  o.check(dropped == 0, std::to_string(dropped) + " dropped");
  o.check(silent_nodes == 0 && r.transitions.size() == 1 && r.store_up_at_end,
          "not sustained end to end (node silent or control plane left Online)");
  o.check(r.wall_seconds < kScaleWallLimitS, "runtime over 2 min");
  o.why << r.counters.size() << " nodes, store rows " << r.store_rows << " = emitted " << emitted << " - dropped "
        << dropped << ", wall " << r.wall_seconds << " s";
  return o;
}

Outcome rtc() {
  Outcome o;
  constexpr std::int64_t kYearMs = 365LL * 24 * 3600 * 1000;
  auto offset = edge::rtc_now(edge::RtcSim{2.0, 0}, kYearMs) - kYearMs;
  o.check(std::llabs(offset - kRtcExpectedOffsetMs) <= kRtcToleranceMs, "formula offset " + std::to_string(offset));

  // same through a fog agent's reading timestamps
  fog::AgentConfig cfg;
  cfg.fog_id = "fog-1";
  cfg.rtc = edge::RtcSim{2.0, 0};
  fog::DeviceSpec s;
  s.desc.id = {"fog-1", "sensor-1"};
  s.desc.unit = Unit::Celsius;
  s.desc.push_period = std::chrono::seconds(1);
  fog::FogAgent agent(cfg, {s});
  auto readings = agent.tick(SimTime(kYearMs)).readings;
  auto reported = readings.empty() ? 0 : readings[0].timestamp - kYearMs;
  o.check(std::llabs(reported - kRtcExpectedOffsetMs) <= kRtcToleranceMs,
          "reading timestamp offset " + std::to_string(reported));
  o.why << "offset after one year at +2 ppm: " << offset << " ms (reading timestamp " << reported << " ms)";
  return o;
}

Outcome durability() {
  Outcome o;
  auto r = run("durability.yaml");
  auto base = run("durability.yaml", true);
  o.check(r.pre_kill_table.has_value() && r.recovered_table.has_value(), "kill/restore did not happen");
  if (r.pre_kill_table && r.recovered_table) {
    o.check(*r.recovered_table == *r.pre_kill_table, "restart lost or changed committed rows");
    auto final_set = as_set(r.final_table);
    auto pre = as_set(*r.pre_kill_table);
    std::size_t post = 0;
    for (const auto& row : final_set) post += pre.count(row) ? 0 : 1;
    bool superset = std::includes(final_set.begin(), final_set.end(), pre.begin(), pre.end());
    o.check(superset && final_set.size() == pre.size() + post, "final table is not pre-kill plus post-restart rows");
    o.check(final_set == as_set(base.final_table), "final table differs from an uninterrupted run");
    o.why << "pre-kill " << pre.size() << " rows recovered intact, " << post << " written after restart";
  }

  // duplicate replay after a crash changes nothing
  auto dir = std::filesystem::temp_directory_path() / ("fogdeck-acc-" + std::to_string(std::random_device{}()));
  std::vector<std::vector<SensorReading>> batches;
  for (std::uint64_t b = 0; b < 20; ++b) {
    std::vector<SensorReading> batch;
    for (std::uint64_t i = 1; i <= 10; ++i) {
      batch.push_back(SensorReading{{"fog-1", "sensor-" + std::to_string(i % 3)}, 20.0 + i, Unit::Celsius,
                                    static_cast<TimestampMs>(b * 100 + i), b * 10 + i});
    }
    batches.push_back(batch);
  }
  std::vector<SensorReading> before;
  {
    store::Datastore ds({dir, true});
    for (const auto& b : batches) ds.put_readings(b);
    before = ds.history();
    ds.abandon();
  }
  std::size_t added = 0;
  std::vector<SensorReading> after;
  {
    store::Datastore ds({dir, true});
    for (const auto& b : batches) added += ds.put_readings(b);
    after = ds.history();
    ds.close();
  }
  std::filesystem::remove_all(dir);
  o.check(added == 0 && after == before, "duplicate replay changed the table");
  o.why << ", replay of " << batches.size() << " batches added " << added;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::string only;
  g_dir = "scenarios";
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--scenarios" && i + 1 < argc) g_dir = argv[++i];
    else if (a == "--only" && i + 1 < argc) only = argv[++i];
  }

  const std::vector<std::pair<std::string, Outcome (*)()>> criteria = {
      {"failover", failover},   {"edge_failure", edge_failure}, {"threshold_alert", threshold_alert},
      {"security", security},   {"protocol", protocol},         {"scale", scale},
      {"rtc_drift", rtc},       {"durability", durability},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && only != name) continue;
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.why << "exception: " << e.what();
    }
    std::cout << (out.pass ? "PASS " : "FAIL ") << name << ": " << out.why.str() << std::endl;
    failed += out.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
