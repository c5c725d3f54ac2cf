#include "fogdeck/messages.hpp"

#include <sodium.h>

#include "fogdeck/json_codec.hpp"

namespace fogdeck::wire {

namespace {

std::vector<std::uint8_t> pack(const json& j) { return json::to_cbor(j); }

json unpack(std::span<const std::uint8_t> p) {
  try {
    return json::from_cbor(p.begin(), p.end());
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed payload: ") + e.what());
  }
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed payload: ") + e.what());
  }
}

std::string random_challenge() {
  if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  unsigned char raw[16];
  randombytes_buf(raw, sizeof raw);
  char hex[sizeof raw * 2 + 1];
  sodium_bin2hex(hex, sizeof hex, raw, sizeof raw);
  return hex;
}

}  // namespace

std::vector<std::uint8_t> to_payload(const HelloMsg& m) {
  return pack({{"client_id", m.client_id}, {"challenge", m.challenge}});
}
std::vector<std::uint8_t> to_payload(const AckMsg& m) {
  return pack({{"request_id", m.request_id}, {"ok", m.ok}, {"challenge", m.challenge}, {"message", m.message}});
}
std::vector<std::uint8_t> to_payload(const ReadingBatchMsg& m) {
  return pack({{"fog_id", m.fog_id}, {"readings", m.readings}});
}
std::vector<std::uint8_t> to_payload(const InstructionMsg& m) {
  return pack({{"request_id", m.request_id}, {"instruction", m.instruction}});
}
std::vector<std::uint8_t> to_payload(const HealthMsg& m) {
  return pack({{"tick_ms", m.tick_ms}, {"report", m.report}, {"security", m.security}});
}
std::vector<std::uint8_t> to_payload(const ErrorMsg& m) {
  return pack({{"code", m.code}, {"message", m.message}});
}

HelloMsg hello_from_payload(std::span<const std::uint8_t> p) {
  auto j = unpack(p);
  return guarded([&] { return HelloMsg{j.at("client_id").get<std::string>(), j.at("challenge").get<std::string>()}; });
}
AckMsg ack_from_payload(std::span<const std::uint8_t> p) {
  auto j = unpack(p);
  return guarded([&] {
    return AckMsg{j.value("request_id", std::uint64_t{0}), j.value("ok", true), j.value("challenge", std::string{}),
                  j.value("message", std::string{})};
  });
}
ReadingBatchMsg reading_batch_from_payload(std::span<const std::uint8_t> p) {
  auto j = unpack(p);
  return guarded([&] {
    return ReadingBatchMsg{j.at("fog_id").get<std::string>(), j.at("readings").get<std::vector<SensorReading>>()};
  });
}
InstructionMsg instruction_from_payload(std::span<const std::uint8_t> p) {
  auto j = unpack(p);
  return guarded([&] {
    return InstructionMsg{j.value("request_id", std::uint64_t{0}), j.at("instruction").get<Instruction>()};
  });
}
HealthMsg health_from_payload(std::span<const std::uint8_t> p) {
  auto j = unpack(p);
  return guarded([&] {
    return HealthMsg{j.at("tick_ms").get<std::int64_t>(), j.at("report").get<NodeReport>(),
                     j.value("security", std::vector<SecurityEvent>{})};
  });
}
ErrorMsg error_from_payload(std::span<const std::uint8_t> p) {
  auto j = unpack(p);
  return guarded([&] { return ErrorMsg{j.value("code", std::string{}), j.value("message", std::string{})}; });
}

std::unique_ptr<FramedConnection> client_handshake(net::Socket socket, const PresharedKey& key,
                                                   const std::string& client_id,
                                                   std::chrono::milliseconds timeout) {
  auto conn = std::make_unique<FramedConnection>(std::move(socket), key);
  HelloMsg hello{client_id, random_challenge()};
  conn->send(MsgType::Hello, to_payload(hello));

  auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw HandshakeError(HandshakeErrc::Timeout, "no handshake ack");
    std::optional<DecodedFrame> frame;
    try {
      frame = conn->receive(left);
    } catch (const net::NetError&) {
      throw HandshakeError(HandshakeErrc::AuthFailure, "node closed the connection during handshake");
    } catch (const FrameError& e) {
      throw HandshakeError(HandshakeErrc::AuthFailure, e.what());
    }
    if (!frame) continue;
    if (frame->type == MsgType::Ack) {
      auto ack = ack_from_payload(frame->payload);
      if (!ack.ok || ack.challenge != hello.challenge) {
        throw HandshakeError(HandshakeErrc::AuthFailure, "handshake ack did not echo the challenge");
      }
      return conn;
    }
    if (frame->type == MsgType::Error) {
      throw HandshakeError(HandshakeErrc::Protocol, error_from_payload(frame->payload).message);
    }
    // Anything else before the Ack is a protocol violation.
    throw HandshakeError(HandshakeErrc::Protocol, "unexpected frame before handshake ack");
  }
}

HelloMsg server_await_hello(FramedConnection& conn, std::chrono::milliseconds timeout) {
  std::optional<DecodedFrame> frame;
  try {
    frame = conn.receive(timeout);
  } catch (const FrameError& e) {
    throw HandshakeError(HandshakeErrc::AuthFailure, e.what());
  } catch (const net::NetError& e) {
    throw HandshakeError(HandshakeErrc::Protocol, e.what());
  }
  if (!frame) throw HandshakeError(HandshakeErrc::Timeout, "no hello within timeout");
  if (frame->type != MsgType::Hello) throw HandshakeError(HandshakeErrc::Protocol, "first frame is not hello");
  HelloMsg hello;
  try {
    hello = hello_from_payload(frame->payload);
  } catch (const std::invalid_argument& e) {
    throw HandshakeError(HandshakeErrc::Protocol, e.what());
  }
  if (hello.client_id.empty()) throw HandshakeError(HandshakeErrc::Protocol, "empty client id");
  return hello;
}

}  // namespace fogdeck::wire
