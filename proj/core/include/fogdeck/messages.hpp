#pragma once

// Frame payloads. Each payload is the CBOR form of a JSON document built from
// the same encodings the datastore uses.

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fogdeck/model.hpp"
#include "fogdeck/net.hpp"
#include "fogdeck/wire.hpp"

namespace fogdeck::wire {

struct HelloMsg {
  std::string client_id;
  std::string challenge;  // hex
};

struct AckMsg {
  std::uint64_t request_id = 0;
  bool ok = true;
  std::string challenge;  // echoed from Hello
  std::string message;
};

struct ReadingBatchMsg {
  std::string fog_id;
  std::vector<SensorReading> readings;
};

struct InstructionMsg {
  std::uint64_t request_id = 0;
  Instruction instruction;
};

/// Sent by a node after every tick (and on request). `tick_ms` is the node's
/// virtual time at the end of the tick that produced it.
struct HealthMsg {
  std::int64_t tick_ms = 0;
  NodeReport report;
  std::vector<SecurityEvent> security;
};

struct ErrorMsg {
  std::string code;
  std::string message;
};

std::vector<std::uint8_t> to_payload(const HelloMsg& m);
std::vector<std::uint8_t> to_payload(const AckMsg& m);
std::vector<std::uint8_t> to_payload(const ReadingBatchMsg& m);
std::vector<std::uint8_t> to_payload(const InstructionMsg& m);
std::vector<std::uint8_t> to_payload(const HealthMsg& m);
std::vector<std::uint8_t> to_payload(const ErrorMsg& m);

/// Throws std::invalid_argument on malformed payloads.
HelloMsg hello_from_payload(std::span<const std::uint8_t> p);
AckMsg ack_from_payload(std::span<const std::uint8_t> p);
ReadingBatchMsg reading_batch_from_payload(std::span<const std::uint8_t> p);
InstructionMsg instruction_from_payload(std::span<const std::uint8_t> p);
HealthMsg health_from_payload(std::span<const std::uint8_t> p);
ErrorMsg error_from_payload(std::span<const std::uint8_t> p);

inline constexpr std::chrono::milliseconds kHelloTimeout{5000};

enum class HandshakeErrc { AuthFailure, Timeout, Protocol };

class HandshakeError : public std::runtime_error {
 public:
  HandshakeError(HandshakeErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  HandshakeErrc code() const noexcept { return code_; }

 private:
  HandshakeErrc code_;
};

/// Client side: sends Hello with a fresh random challenge and waits for the
/// Ack that echoes it. A peer holding a different key cannot produce that Ack;
/// the node closes the connection instead, which surfaces as AuthFailure.
std::unique_ptr<FramedConnection> client_handshake(net::Socket socket, const PresharedKey& key,
                                                   const std::string& client_id,
                                                   std::chrono::milliseconds timeout);

/// Server side: waits for the first frame, which must be an authentic Hello.
/// Returns the Hello; the caller replies with the Ack once it has registered
/// the client. Throws HandshakeError.
HelloMsg server_await_hello(FramedConnection& conn, std::chrono::milliseconds timeout = kHelloTimeout);

}  // namespace fogdeck::wire
