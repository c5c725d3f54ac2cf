#pragma once

// HTTP + JSON surface of the datastore (default port 7800).
//
//   PUT  /v1/readings                 {"readings": [...]}        -> {"accepted": n}
//   GET  /v1/readings/latest?fog=&device=                        -> SensorReading | 404
//   GET  /v1/readings?fog=&device=                               -> {"readings": [...]}
//   GET  /v1/stats?fog=                                          -> {"stats": [...]}
//   POST /v1/instructions             Instruction                -> {"instr_id": n}
//   GET  /v1/instructions?fog=&since=                            -> {"instructions": [...]}
//   GET  /v1/nodes                                               -> {"nodes": [...]}
//   POST /v1/nodes                    NodeRecord                 -> {"ok": true}
//   PUT  /v1/health                   NodeReport                 -> {"ok": true}
//   GET  /v1/health?fog=                                         -> {"reports": [...]}
//   POST /v1/security                 {"events": [...]}          -> {"accepted": n}
//   GET  /v1/security                                            -> {"events": [...]}
//
// Errors are {"error": code, "message": text[, "violations": [...]]} with 400,
// 401 (bad bearer token) or 404.

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fogdeck/datastore.hpp"

namespace fogdeck::store {

inline constexpr std::uint16_t kDefaultStorePort = 7800;

struct StoreServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = kDefaultStorePort;  // 0 = ephemeral
  std::string token;                       // empty = no auth
};

class StoreServer {
 public:
  StoreServer(Datastore& store, StoreServerOptions options);
  ~StoreServer();
  StoreServer(const StoreServer&) = delete;
  StoreServer& operator=(const StoreServer&) = delete;

  /// Binds and starts serving on a background thread. Throws on bind failure.
  void start();
  void stop();
  bool running() const noexcept;
  std::uint16_t port() const noexcept { return port_; }
  std::string url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  StoreServerOptions options_;
  std::uint16_t port_ = 0;
  std::thread thread_;
};

enum class StoreErrc { Timeout, Unavailable, Rejected, NotFound, BadResponse };

std::string_view to_string(StoreErrc e) noexcept;

class StoreError : public std::runtime_error {
 public:
  StoreError(StoreErrc code, int status, const std::string& what)
      : std::runtime_error(what), code_(code), status_(status) {}
  StoreErrc code() const noexcept { return code_; }
  int status() const noexcept { return status_; }

 private:
  StoreErrc code_;
  int status_;
};

/// Thread-safe; calls are serialized per client.
class StoreClient {
 public:
  /// `base_url` like "http://127.0.0.1:7800".
  explicit StoreClient(std::string base_url, std::string token = {},
                       std::chrono::milliseconds timeout = std::chrono::milliseconds(2000));
  ~StoreClient();
  StoreClient(const StoreClient&) = delete;
  StoreClient& operator=(const StoreClient&) = delete;

  const std::string& base_url() const noexcept { return base_url_; }

  std::size_t put_readings(std::span<const SensorReading> batch);
  SensorReading query_latest(const DeviceId& device);
  std::vector<SensorReading> history(const std::optional<std::string>& fog_id = std::nullopt);
  std::vector<SensorReading> stats(const std::optional<std::string>& fog_id = std::nullopt);
  std::uint64_t append_instruction(const Instruction& instruction);
  std::vector<Instruction> fetch_instructions(const std::string& fog_id, std::uint64_t since);
  std::vector<NodeRecord> nodes();
  void register_node(const NodeRecord& node);
  void put_report(const NodeReport& report);
  std::vector<NodeReport> reports(const std::optional<std::string>& fog_id = std::nullopt);
  std::size_t put_security(std::span<const SecurityEvent> events);
  std::vector<SecurityEvent> security();

 private:
  json request(const std::string& method, const std::string& path, const json* body);

  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string base_url_;
};

}  // namespace fogdeck::store
