#pragma once

// Panel HTTP API over a ControlPlane (default port 7900).
//
//   GET  /api/panel                              -> PanelModel
//   GET  /api/health                             -> {"health": [...], "nodes": [...]}
//   GET  /api/network                            -> {"network": {...}, "transitions": [...]}
//   GET  /api/security                           -> {"events": [...]}
//   GET  /api/alerts                             -> {"alerts": [...], "episodes": [...]}
//   POST /api/devices/{fog}/{device}/control     body = instruction body -> ControlResult
//   POST /api/nodes/{fog}/control                body = instruction body -> ControlResult
//   POST /api/actuators/check-all                -> {"results": [...]}
//   GET  /api/stream                             -> NDJSON events
//
// The stream opens with {"type":"snapshot","revision":n,"model":{...}} and then
// sends {"type":"delta","revision":n,"changes":{section: value}} carrying only
// the top-level sections that changed, plus {"type":"heartbeat"} when idle.

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>

#include "fogdeck/control_plane.hpp"

namespace fogdeck::control {

struct PanelServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = kDefaultPanelPort;  // 0 = ephemeral
  std::string static_dir;                  // served at / when set
};

class PanelServer {
 public:
  PanelServer(ControlPlane& control, PanelServerOptions options);
  ~PanelServer();
  PanelServer(const PanelServer&) = delete;
  PanelServer& operator=(const PanelServer&) = delete;

  /// Throws when the port cannot be bound.
  void start();
  void stop();
  std::uint16_t port() const noexcept { return port_; }
  std::string url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  PanelServerOptions options_;
  std::uint16_t port_ = 0;
  std::thread thread_;
};

/// Changed top-level sections of `next` relative to `prev`.
json panel_delta(const json& prev, const json& next);

}  // namespace fogdeck::control
