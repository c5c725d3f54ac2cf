#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "fogdeck/messages.hpp"
#include "fogdeck/net.hpp"
#include "fogdeck/wire.hpp"

using namespace fogdeck;
using namespace fogdeck::wire;
using namespace std::chrono_literals;

namespace {

PresharedKey counting_key() {
  std::array<std::uint8_t, kKeySize> k{};
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = static_cast<std::uint8_t>(i);
  return PresharedKey(k);
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoi(std::string(hex.substr(i, 2)), nullptr, 16)));
  }
  return out;
}

std::vector<std::uint8_t> bytes(std::string_view s) { return {s.begin(), s.end()}; }

}  // namespace

// Produced with the Python `cryptography` package's ChaCha20Poly1305 over the
// same header/nonce layout: key 00..1f, counter 1, salt a1b2c3d4, Health frame.
TEST(Frame, FrozenVector) {
  auto frame = encode_frame(MsgType::Health, bytes("hello fogdeck"), counting_key(), 1, NonceSalt{0xa1, 0xb2, 0xc3, 0xd4});
  auto expect = from_hex(
      "464401050000000d0000000000000001a1b2c3d43866318f01c3589135a1674bcd4d974efb43a38f8d47819f36447bd19e");
  EXPECT_EQ(frame, expect);
  auto d = decode_frame(expect, counting_key(), 0);
  EXPECT_EQ(d.type, MsgType::Health);
  EXPECT_EQ(d.counter, 1u);
  EXPECT_EQ(d.payload, bytes("hello fogdeck"));
}

TEST(Frame, EmptyPayloadIs36Bytes) {
  EXPECT_EQ(encode_frame(MsgType::Ack, {}, counting_key(), 1).size(), 36u);
}

TEST(Frame, LengthIsOverheadPlusPayload) {
  std::mt19937_64 rng(11);
  for (std::size_t n : {0, 1, 15, 16, 17, 255, 256, 4096, 65536, 1 << 20}) {
    std::vector<std::uint8_t> p(n);
    for (auto& b : p) b = static_cast<std::uint8_t>(rng());
    auto f = encode_frame(MsgType::ReadingBatch, p, counting_key(), 5);
    EXPECT_EQ(f.size(), 36 + n);
    EXPECT_EQ(parse_header(f).payload_len, n);
  }
  std::vector<std::uint8_t> too_big((1 << 20) + 1);
  EXPECT_THROW(encode_frame(MsgType::ReadingBatch, too_big, counting_key(), 1), FrameError);
}

TEST(Frame, RandomizedRoundTrip) {
  std::mt19937_64 rng(20240601);
  auto key = PresharedKey::random();
  std::uniform_int_distribution<int> type(1, 6);
  std::geometric_distribution<std::size_t> len(0.01);
  for (std::uint64_t i = 1; i <= 10'000; ++i) {
    std::vector<std::uint8_t> p(std::min<std::size_t>(len(rng), 4000));
    for (auto& b : p) b = static_cast<std::uint8_t>(rng());
    auto t = static_cast<MsgType>(type(rng));
    auto f = encode_frame(t, p, key, i);
    ASSERT_EQ(f.size(), 36 + p.size());
    auto d = decode_frame(f, key, i - 1);
    ASSERT_EQ(d.type, t);
    ASSERT_EQ(d.payload, p);
    ASSERT_EQ(d.counter, i);
  }
}

// Every single-bit flip of every frame up to 64 bytes is rejected. Flips in
// the magic, version or length fields fail the structural checks; all others
// fail authentication.
TEST(Frame, ExhaustiveSingleBitTamper) {
  auto key = counting_key();
  std::mt19937_64 rng(3);
  std::size_t checked = 0;
  for (std::size_t n = 0; n + kFrameOverhead <= 64; ++n) {
    std::vector<std::uint8_t> p(n);
    for (auto& b : p) b = static_cast<std::uint8_t>(rng());
    auto f = encode_frame(MsgType::Instruction, p, key, 7);
    for (std::size_t bit = 0; bit < f.size() * 8; ++bit) {
      auto t = f;
      t[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      std::size_t byte = bit / 8;
      try {
        decode_frame(t, key, 0);
        ADD_FAILURE() << "accepted flip of bit " << bit << " in a " << f.size() << "-byte frame";
      } catch (const FrameError& e) {
        bool structural = byte <= 2 || (byte >= 4 && byte <= 7);
        if (!structural) {
          EXPECT_EQ(e.code(), FrameErrc::AuthFailure) << "byte " << byte;
        }
      }
      ++checked;
    }
  }
  EXPECT_GT(checked, 10'000u);
}

TEST(Frame, WrongKeyAndReplay) {
  auto f = encode_frame(MsgType::Health, bytes("x"), counting_key(), 3);
  try {
    decode_frame(f, PresharedKey::derive("other"), 0);
    FAIL();
  } catch (const FrameError& e) {
    EXPECT_EQ(e.code(), FrameErrc::AuthFailure);
  }
  EXPECT_NO_THROW(decode_frame(f, counting_key(), 2));
  try {
    decode_frame(f, counting_key(), 3);
    FAIL();
  } catch (const FrameError& e) {
    EXPECT_EQ(e.code(), FrameErrc::ReplayDetected);
  }
}

TEST(Frame, TruncatedAndTrailing) {
  auto f = encode_frame(MsgType::Health, bytes("abc"), counting_key(), 1);
  std::vector<std::uint8_t> shortf(f.begin(), f.end() - 1);
  EXPECT_THROW(decode_frame(shortf, counting_key(), 0), FrameError);
  auto longer = f;
  longer.push_back(0);
  EXPECT_THROW(decode_frame(longer, counting_key(), 0), FrameError);
}

TEST(Key, DeriveIsBlake2b256OfLabel) {
  // python3 -c "import hashlib; print(hashlib.blake2b(b'x', digest_size=32).hexdigest())"
  auto expect = from_hex("d161d71145abeec5ef15abcf0459cec60a27321e2f0ac0ef7ace5254f5944476");
  auto k = PresharedKey::derive("x");
  EXPECT_TRUE(std::equal(expect.begin(), expect.end(), k.data()));
  EXPECT_THROW(PresharedKey::from_hex("abc"), std::invalid_argument);
}

TEST(Messages, PayloadRoundTrips) {
  ReadingBatchMsg batch{"fog-1", {SensorReading{{"fog-1", "sensor-1"}, 21.5, Unit::Celsius, 99, 4}}};
  auto rb = reading_batch_from_payload(to_payload(batch));
  EXPECT_EQ(rb.fog_id, "fog-1");
  EXPECT_EQ(rb.readings, batch.readings);
  InstructionMsg in{12, Instruction{0, Target{"fog-1", "buzzer-1"}, ActuatorCommand{5, 440, 1000}, 0}};
  auto back = instruction_from_payload(to_payload(in));
  EXPECT_EQ(back.request_id, 12u);
  EXPECT_EQ(back.instruction, in.instruction);
  HealthMsg h;
  h.tick_ms = 3000;
  h.report.fog_id = "fog-1";
  h.security.push_back(SecurityEvent{"fog-1", SecurityEventKind::ReplayDetected, "peer", 5});
  auto hb = health_from_payload(to_payload(h));
  EXPECT_EQ(hb.tick_ms, 3000);
  EXPECT_EQ(hb.report, h.report);
  EXPECT_EQ(hb.security, h.security);
  EXPECT_THROW(hello_from_payload(bytes("not cbor at all")), std::invalid_argument);
}

namespace {

struct Loop {
  net::Listener listener{"127.0.0.1", 0};
  std::unique_ptr<FramedConnection> server;
  std::unique_ptr<FramedConnection> client;

  Loop(const PresharedKey& server_key, const PresharedKey& client_key) {
    std::thread t([&] {
      auto s = listener.accept(2000ms);
      server = std::make_unique<FramedConnection>(std::move(*s), server_key);
    });
    auto sock = net::connect_tcp("127.0.0.1", listener.port(), 1000ms);
    t.join();
    client = std::make_unique<FramedConnection>(std::move(sock), client_key);
  }
};

}  // namespace

TEST(Connection, StreamReplayAndTamperKeepAlignment) {
  auto key = PresharedKey::derive("loop");
  Loop loop(key, key);
  loop.client->send(MsgType::Health, bytes("one"));
  loop.client->send_raw(loop.client->last_sent_frame());
  auto tampered = loop.client->encode_next(MsgType::Health, bytes("two"));
  tampered[25] ^= 0x10;
  loop.client->send_raw(tampered);
  loop.client->send(MsgType::Health, bytes("three"));

  auto first = loop.server->receive(1000ms);
  ASSERT_TRUE(first);
  EXPECT_EQ(first->payload, bytes("one"));
  try {
    loop.server->receive(1000ms);
    FAIL();
  } catch (const FrameError& e) {
    EXPECT_EQ(e.code(), FrameErrc::ReplayDetected);
  }
  try {
    loop.server->receive(1000ms);
    FAIL();
  } catch (const FrameError& e) {
    EXPECT_EQ(e.code(), FrameErrc::AuthFailure);
  }
  EXPECT_FALSE(loop.server->desynchronized());
  auto third = loop.server->receive(1000ms);
  ASSERT_TRUE(third);
  EXPECT_EQ(third->payload, bytes("three"));
}

TEST(Connection, HandshakeWrongKey) {
  Loop loop(PresharedKey::derive("server"), PresharedKey::derive("client"));
  std::thread srv([&] {
    try {
      server_await_hello(*loop.server, 2000ms);
      ADD_FAILURE() << "hello accepted under the wrong key";
    } catch (const HandshakeError& e) {
      EXPECT_EQ(e.code(), HandshakeErrc::AuthFailure);
    }
    loop.server->shutdown();
  });
  auto hello = to_payload(HelloMsg{"intruder", "00"});
  loop.client->send(MsgType::Hello, hello);
  EXPECT_THROW(loop.client->receive(2000ms), std::exception);
  srv.join();
}

TEST(Connection, HelloTimeout) {
  auto key = PresharedKey::derive("k");
  Loop loop(key, key);
  try {
    server_await_hello(*loop.server, 100ms);
    FAIL();
  } catch (const HandshakeError& e) {
    EXPECT_EQ(e.code(), HandshakeErrc::Timeout);
  }
}
