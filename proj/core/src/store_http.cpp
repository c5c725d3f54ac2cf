#include "fogdeck/store_http.hpp"

#include <httplib.h>

#include <mutex>

namespace fogdeck::store {

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  reply(res, status, {{"error", code}, {"message", message}});
}

std::optional<std::string> param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  auto v = req.get_param_value(name);
  if (v.empty()) return std::nullopt;
  return v;
}

}  // namespace

struct StoreServer::Impl {
  explicit Impl(Datastore& s) : store(s) {}
  Datastore& store;
  httplib::Server server;
};

StoreServer::StoreServer(Datastore& store, StoreServerOptions options)
    : impl_(std::make_unique<Impl>(store)), options_(std::move(options)) {
  auto& svr = impl_->server;
  auto& ds = impl_->store;

  svr.set_pre_routing_handler([token = options_.token](const httplib::Request& req, httplib::Response& res) {
    if (!token.empty() && req.get_header_value("Authorization") != "Bearer " + token) {
      reply_error(res, 401, "unauthorized", "missing or wrong bearer token");
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const ValidationError& e) {
      json violations = json::array();
      for (auto v : e.violations()) violations.push_back(to_string(v));
      reply(res, 400, {{"error", "validation_error"}, {"message", e.what()}, {"violations", violations}});
    } catch (const NotFound& e) {
      reply_error(res, 404, "not_found", e.what());
    } catch (const json::exception& e) {
      reply_error(res, 400, "bad_request", e.what());
    } catch (const std::invalid_argument& e) {
      reply_error(res, 400, "bad_request", e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, "internal", e.what());
    }
  });

  svr.Put("/v1/readings", [&ds](const httplib::Request& req, httplib::Response& res) {
    auto body = json::parse(req.body);
    auto batch = body.at("readings").get<std::vector<SensorReading>>();
    auto accepted = ds.put_readings(batch);
    reply(res, 200, {{"accepted", accepted}});
  });

  svr.Get("/v1/readings/latest", [&ds](const httplib::Request& req, httplib::Response& res) {
    auto fog = param(req, "fog");
    auto device = param(req, "device");
    if (!fog || !device) throw std::invalid_argument("fog and device are required");
    reply(res, 200, ds.query_latest(DeviceId{*fog, *device}));
  });

  svr.Get("/v1/readings", [&ds](const httplib::Request& req, httplib::Response& res) {
    reply(res, 200, {{"readings", ds.history(param(req, "fog"), param(req, "device"))}});
  });

  svr.Get("/v1/stats", [&ds](const httplib::Request& req, httplib::Response& res) {
    reply(res, 200, {{"stats", ds.stats(param(req, "fog"))}});
  });

  svr.Post("/v1/instructions", [&ds](const httplib::Request& req, httplib::Response& res) {
    auto instr = json::parse(req.body).get<Instruction>();
    reply(res, 200, {{"instr_id", ds.append_instruction(std::move(instr))}});
  });

  svr.Get("/v1/instructions", [&ds](const httplib::Request& req, httplib::Response& res) {
    auto fog = param(req, "fog");
    if (!fog) throw std::invalid_argument("fog is required");
    std::uint64_t since = 0;
    if (auto s = param(req, "since")) since = std::stoull(*s);
    reply(res, 200, {{"instructions", ds.fetch_instructions(*fog, since)}});
  });

  svr.Get("/v1/nodes", [&ds](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, {{"nodes", ds.nodes()}});
  });

  svr.Post("/v1/nodes", [&ds](const httplib::Request& req, httplib::Response& res) {
    ds.register_node(json::parse(req.body).get<NodeRecord>());
    reply(res, 200, {{"ok", true}});
  });

  svr.Put("/v1/health", [&ds](const httplib::Request& req, httplib::Response& res) {
    ds.put_report(json::parse(req.body).get<NodeReport>());
    reply(res, 200, {{"ok", true}});
  });

  svr.Get("/v1/health", [&ds](const httplib::Request& req, httplib::Response& res) {
    reply(res, 200, {{"reports", ds.reports(param(req, "fog"))}});
  });

  svr.Post("/v1/security", [&ds](const httplib::Request& req, httplib::Response& res) {
    auto events = json::parse(req.body).at("events").get<std::vector<SecurityEvent>>();
    reply(res, 200, {{"accepted", ds.put_security(events)}});
  });

  svr.Get("/v1/security", [&ds](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, {{"events", ds.security()}});
  });
}

StoreServer::~StoreServer() { stop(); }

void StoreServer::start() {
  if (thread_.joinable()) return;
  auto& svr = impl_->server;
  if (options_.port == 0) {
    int p = svr.bind_to_any_port(options_.host);
    if (p <= 0) throw std::runtime_error("datastore: cannot bind " + options_.host);
    port_ = static_cast<std::uint16_t>(p);
  } else {
    if (!svr.bind_to_port(options_.host, options_.port)) {
      throw std::runtime_error("datastore: cannot bind " + options_.host + ":" + std::to_string(options_.port));
    }
    port_ = options_.port;
  }
  thread_ = std::thread([&svr] { svr.listen_after_bind(); });
  svr.wait_until_ready();
}

void StoreServer::stop() {
  if (!thread_.joinable()) return;
  impl_->server.stop();
  thread_.join();
}

bool StoreServer::running() const noexcept { return impl_->server.is_running(); }

std::string StoreServer::url() const { return "http://" + options_.host + ":" + std::to_string(port_); }

std::string_view to_string(StoreErrc e) noexcept {
  switch (e) {
    case StoreErrc::Timeout: return "timeout";
    case StoreErrc::Unavailable: return "unavailable";
    case StoreErrc::Rejected: return "rejected";
    case StoreErrc::NotFound: return "not_found";
    case StoreErrc::BadResponse: return "bad_response";
  }
  return "unknown";
}

struct StoreClient::Impl {
  Impl(const std::string& url, std::chrono::milliseconds timeout) : client(url) {
    auto sec = static_cast<time_t>(timeout.count() / 1000);
    auto usec = static_cast<time_t>((timeout.count() % 1000) * 1000);
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    client.set_keep_alive(false);
  }
  std::mutex mutex;
  httplib::Client client;
  httplib::Headers headers;
};

StoreClient::StoreClient(std::string base_url, std::string token, std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>(base_url, timeout)), base_url_(std::move(base_url)) {
  if (!token.empty()) impl_->headers.emplace("Authorization", "Bearer " + token);
}

StoreClient::~StoreClient() = default;

json StoreClient::request(const std::string& method, const std::string& path, const json* body) {
  std::lock_guard lock(impl_->mutex);
  auto& c = impl_->client;
  httplib::Result res{nullptr, httplib::Error::Unknown};
  std::string payload = body ? body->dump() : std::string{};
  if (method == "GET") {
    res = c.Get(path, impl_->headers);
  } else if (method == "PUT") {
    res = c.Put(path, impl_->headers, payload, "application/json");
  } else {
    res = c.Post(path, impl_->headers, payload, "application/json");
  }
  if (!res) {
    auto err = res.error();
    auto what = base_url_ + path + ": " + httplib::to_string(err);
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read || err == httplib::Error::Write) {
      throw StoreError(StoreErrc::Timeout, 0, what);
    }
    throw StoreError(StoreErrc::Unavailable, 0, what);
  }
  json parsed;
  try {
    parsed = json::parse(res->body);
  } catch (const json::parse_error&) {
    throw StoreError(StoreErrc::BadResponse, res->status, base_url_ + path + ": response is not JSON");
  }
  if (res->status == 404) throw StoreError(StoreErrc::NotFound, 404, parsed.value("message", std::string("not found")));
  if (res->status != 200) {
    throw StoreError(StoreErrc::Rejected, res->status, parsed.value("message", std::string("request rejected")));
  }
  return parsed;
}

std::size_t StoreClient::put_readings(std::span<const SensorReading> batch) {
  json body = {{"readings", json(std::vector<SensorReading>(batch.begin(), batch.end()))}};
  return request("PUT", "/v1/readings", &body).at("accepted").get<std::size_t>();
}

SensorReading StoreClient::query_latest(const DeviceId& device) {
  return request("GET", "/v1/readings/latest?fog=" + device.fog_id + "&device=" + device.device_id, nullptr)
      .get<SensorReading>();
}

std::vector<SensorReading> StoreClient::history(const std::optional<std::string>& fog_id) {
  std::string path = "/v1/readings";
  if (fog_id) path += "?fog=" + *fog_id;
  return request("GET", path, nullptr).at("readings").get<std::vector<SensorReading>>();
}

std::vector<SensorReading> StoreClient::stats(const std::optional<std::string>& fog_id) {
  std::string path = "/v1/stats";
  if (fog_id) path += "?fog=" + *fog_id;
  return request("GET", path, nullptr).at("stats").get<std::vector<SensorReading>>();
}

std::uint64_t StoreClient::append_instruction(const Instruction& instruction) {
  json body = instruction;
  return request("POST", "/v1/instructions", &body).at("instr_id").get<std::uint64_t>();
}

std::vector<Instruction> StoreClient::fetch_instructions(const std::string& fog_id, std::uint64_t since) {
  return request("GET", "/v1/instructions?fog=" + fog_id + "&since=" + std::to_string(since), nullptr)
      .at("instructions")
      .get<std::vector<Instruction>>();
}

std::vector<NodeRecord> StoreClient::nodes() {
  return request("GET", "/v1/nodes", nullptr).at("nodes").get<std::vector<NodeRecord>>();
}

void StoreClient::register_node(const NodeRecord& node) {
  json body = node;
  request("POST", "/v1/nodes", &body);
}

void StoreClient::put_report(const NodeReport& report) {
  json body = report;
  request("PUT", "/v1/health", &body);
}

std::vector<NodeReport> StoreClient::reports(const std::optional<std::string>& fog_id) {
  std::string path = "/v1/health";
  if (fog_id) path += "?fog=" + *fog_id;
  return request("GET", path, nullptr).at("reports").get<std::vector<NodeReport>>();
}

std::size_t StoreClient::put_security(std::span<const SecurityEvent> events) {
  json body = {{"events", json(std::vector<SecurityEvent>(events.begin(), events.end()))}};
  return request("POST", "/v1/security", &body).at("accepted").get<std::size_t>();
}

std::vector<SecurityEvent> StoreClient::security() {
  return request("GET", "/v1/security", nullptr).at("events").get<std::vector<SecurityEvent>>();
}

}  // namespace fogdeck::store
