#pragma once

// Loopback stack for integration tests: datastore, its HTTP server, fog nodes
// and a control plane, stepped by hand.

#include <map>
#include <memory>

#include "fogdeck/control_plane.hpp"
#include "fogdeck/datastore.hpp"
#include "fogdeck/fleet.hpp"
#include "fogdeck/fog_node.hpp"
#include "fogdeck/store_http.hpp"

namespace fogdeck::testing {

inline fog::DeviceSpec sensor_spec(const std::string& fog, const std::string& id, double value, int period_s = 1) {
  fog::DeviceSpec s;
  s.desc.id = {fog, id};
  s.desc.unit = Unit::Celsius;
  s.desc.location.label = "bench";
  s.desc.push_period = std::chrono::seconds(period_s);
  s.desc.threshold = WorkingRange{20, 30};
  s.waveform = edge::Constant{value};
  return s;
}

inline fog::DeviceSpec buzzer_spec(const std::string& fog, const std::string& id = "buzzer-1") {
  fog::DeviceSpec b;
  b.desc.id = {fog, id};
  b.desc.kind = DeviceKind::BuzzerActuator;
  return b;
}

struct Rig {
  KeyRing keys = KeyRing::derived("rig");
  std::unique_ptr<store::Datastore> ds = std::make_unique<store::Datastore>();
  std::unique_ptr<store::StoreServer> server;
  std::uint16_t store_port = 0;
  std::map<std::string, std::unique_ptr<fog::FogNode>> nodes;
  std::unique_ptr<control::ControlPlane> control;
  std::int64_t t = 0;

  explicit Rig(const std::vector<NodeSpec>& specs, std::unique_ptr<control::AlertSink> sink = nullptr) {
    start_store();
    for (const auto& spec : specs) {
      fog::NodeConfig cfg;
      cfg.agent.fog_id = spec.fog_id;
      cfg.devices = spec.devices;
      cfg.store_url = server->url();
      cfg.key = keys.key_for(spec.fog_id);
      auto n = std::make_unique<fog::FogNode>(std::move(cfg));
      n->start();
      nodes[spec.fog_id] = std::move(n);
    }
    control::ControlConfig cc;
    cc.store_url = server->url();
    cc.keys = keys;
    cc.heartbeat_wait = std::chrono::milliseconds(500);
    control = std::make_unique<control::ControlPlane>(cc, std::move(sink));
  }

  void start_store() {
    server = std::make_unique<store::StoreServer>(*ds, store::StoreServerOptions{"127.0.0.1", store_port, ""});
    server->start();
    store_port = server->port();
  }
  void stop_store() { server->stop(); }
  void restore_store() {
    server.reset();
    start_store();
  }

  control::RefreshReport step() {
    for (auto& [id, n] : nodes) {
      if (n->running()) n->step(SimTime(t));
    }
    auto r = control->refresh(SimTime(t));
    t += 1000;
    return r;
  }
  void steps(int n) {
    for (int i = 0; i < n; ++i) step();
  }
};

inline std::vector<NodeSpec> one_node(std::vector<fog::DeviceSpec> devices, const std::string& fog = "fog-1") {
  NodeSpec n;
  n.fog_id = fog;
  n.devices = std::move(devices);
  return {n};
}

}  // namespace fogdeck::testing
