#include "fogdeck/panel_api.hpp"

#include <httplib.h>

namespace fogdeck::control {

using namespace std::chrono_literals;

json panel_delta(const json& prev, const json& next) {
  json changes = json::object();
  for (const auto& [key, value] : next.items()) {
    if (!prev.contains(key) || prev.at(key) != value) changes[key] = value;
  }
  return changes;
}

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

struct StreamState {
  bool started = false;
  std::uint64_t revision = 0;
  json last;
  int idle = 0;
};

}  // namespace

struct PanelServer::Impl {
  explicit Impl(ControlPlane& c) : control(c) {}
  ControlPlane& control;
  httplib::Server server;
  std::atomic<bool> stopping{false};
};

PanelServer::PanelServer(ControlPlane& control, PanelServerOptions options)
    : impl_(std::make_unique<Impl>(control)), options_(std::move(options)) {
  auto& svr = impl_->server;
  auto& cp = impl_->control;

  svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const UnknownDeviceError& e) {
      reply(res, 404, {{"error", "unknown_device"}, {"message", e.what()}});
    } catch (const ValidationError& e) {
      json violations = json::array();
      for (auto v : e.violations()) violations.push_back(to_string(v));
      reply(res, 400, {{"error", "validation_error"}, {"message", e.what()}, {"violations", violations}});
    } catch (const OfflineNodeUnreachable& e) {
      reply(res, 503, {{"error", "offline_node_unreachable"}, {"message", e.what()}});
    } catch (const json::exception& e) {
      reply(res, 400, {{"error", "bad_request"}, {"message", e.what()}});
    } catch (const std::invalid_argument& e) {
      reply(res, 400, {{"error", "bad_request"}, {"message", e.what()}});
    } catch (const std::exception& e) {
      reply(res, 500, {{"error", "internal"}, {"message", e.what()}});
    }
  });

  svr.Get("/api/panel", [&cp](const httplib::Request&, httplib::Response& res) { reply(res, 200, cp.panel()); });

  svr.Get("/api/health", [&cp](const httplib::Request&, httplib::Response& res) {
    auto m = cp.panel();
    reply(res, 200, {{"health", m.health}, {"nodes", m.nodes}});
  });

  svr.Get("/api/network", [&cp](const httplib::Request&, httplib::Response& res) {
    auto m = cp.panel();
    reply(res, 200, {{"network", m.network}, {"transitions", m.transitions}});
  });

  svr.Get("/api/security", [&cp](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, {{"events", cp.security_feed()}});
  });

  svr.Get("/api/alerts", [&cp](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, {{"alerts", cp.alerts()}, {"episodes", cp.episodes()}});
  });

  auto send_result = [](httplib::Response& res, const ControlResult& r) { reply(res, r.ok ? 200 : 409, r); };

  svr.Post(R"(/api/devices/([A-Za-z0-9_-]+)/([A-Za-z0-9_-]+)/control)",
           [&cp, send_result](const httplib::Request& req, httplib::Response& res) {
             auto body = json::parse(req.body).get<InstructionBody>();
             send_result(res, cp.set_control(Target{req.matches[1], std::string(req.matches[2])}, body));
           });

  svr.Post(R"(/api/nodes/([A-Za-z0-9_-]+)/control)",
           [&cp, send_result](const httplib::Request& req, httplib::Response& res) {
             auto body = json::parse(req.body).get<InstructionBody>();
             send_result(res, cp.set_control(Target::node(req.matches[1]), body));
           });

  svr.Post("/api/actuators/check-all", [&cp](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, {{"results", cp.check_all_actuators()}});
  });

  svr.Get("/api/stream", [this, &cp](const httplib::Request&, httplib::Response& res) {
    auto state = std::make_shared<StreamState>();
    res.set_chunked_content_provider("application/x-ndjson", [this, &cp, state](std::size_t, httplib::DataSink& sink) {
      if (impl_->stopping) return false;
      json event;
      if (!state->started) {
        state->started = true;
        state->revision = cp.revision();
        state->last = cp.panel();
        event = {{"type", "snapshot"}, {"revision", state->revision}, {"model", state->last}};
      } else {
        auto rev = cp.wait_for_revision(state->revision, 500ms);
        if (impl_->stopping) return false;
        if (rev == state->revision) {
          if (++state->idle < 10) return true;
          state->idle = 0;
          event = {{"type", "heartbeat"}, {"revision", rev}};
        } else {
          state->idle = 0;
          state->revision = rev;
          json next = cp.panel();
          event = {{"type", "delta"}, {"revision", rev}, {"changes", panel_delta(state->last, next)}};
          state->last = std::move(next);
        }
      }
      auto line = event.dump() + "\n";
      return sink.write(line.data(), line.size());
    });
  });

  if (!options_.static_dir.empty() && !svr.set_mount_point("/", options_.static_dir)) {
    throw std::invalid_argument("static directory not found: " + options_.static_dir);
  }
}

PanelServer::~PanelServer() { stop(); }

void PanelServer::start() {
  if (thread_.joinable()) return;
  auto& svr = impl_->server;
  impl_->stopping = false;
  if (options_.port == 0) {
    int p = svr.bind_to_any_port(options_.host);
    if (p <= 0) throw std::runtime_error("panel: cannot bind " + options_.host);
    port_ = static_cast<std::uint16_t>(p);
  } else {
    if (!svr.bind_to_port(options_.host, options_.port)) {
      throw std::runtime_error("panel: cannot bind " + options_.host + ":" + std::to_string(options_.port));
    }
    port_ = options_.port;
  }
  thread_ = std::thread([&svr] { svr.listen_after_bind(); });
  svr.wait_until_ready();
}

void PanelServer::stop() {
  if (!thread_.joinable()) return;
  impl_->stopping = true;
  impl_->server.stop();
  thread_.join();
}

std::string PanelServer::url() const { return "http://" + options_.host + ":" + std::to_string(port_); }

}  // namespace fogdeck::control
