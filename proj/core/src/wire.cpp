#include "fogdeck/wire.hpp"

#include <sodium.h>

#include <limits>
#include <mutex>

namespace fogdeck::wire {

namespace {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  });
}

void put_be32(std::uint8_t* out, std::uint32_t v) {
  out[0] = static_cast<std::uint8_t>(v >> 24);
  out[1] = static_cast<std::uint8_t>(v >> 16);
  out[2] = static_cast<std::uint8_t>(v >> 8);
  out[3] = static_cast<std::uint8_t>(v);
}

void put_be64(std::uint8_t* out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) {
    out[i] = static_cast<std::uint8_t>(v);
    v >>= 8;
  }
}

std::uint32_t get_be32(const std::uint8_t* in) {
  return (std::uint32_t{in[0]} << 24) | (std::uint32_t{in[1]} << 16) | (std::uint32_t{in[2]} << 8) |
         std::uint32_t{in[3]};
}

std::uint64_t get_be64(const std::uint8_t* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
  return v;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

bool known_type(std::uint8_t t) { return t >= 0x01 && t <= 0x06; }

}  // namespace

std::string_view to_string(MsgType t) noexcept {
  switch (t) {
    case MsgType::Hello: return "hello";
    case MsgType::ReadingBatch: return "reading_batch";
    case MsgType::Instruction: return "instruction";
    case MsgType::Ack: return "ack";
    case MsgType::Health: return "health";
    case MsgType::Error: return "error";
  }
  return "unknown";
}

std::string_view to_string(FrameErrc e) noexcept {
  switch (e) {
    case FrameErrc::PayloadTooLarge: return "payload_too_large";
    case FrameErrc::CounterExhausted: return "counter_exhausted";
    case FrameErrc::BadMagic: return "bad_magic";
    case FrameErrc::UnsupportedVersion: return "unsupported_version";
    case FrameErrc::UnknownMessageType: return "unknown_message_type";
    case FrameErrc::AuthFailure: return "auth_failure";
    case FrameErrc::ReplayDetected: return "replay_detected";
    case FrameErrc::Truncated: return "truncated";
  }
  return "unknown";
}

FrameError::FrameError(FrameErrc code)
    : std::runtime_error("frame error: " + std::string(to_string(code))), code_(code) {}

PresharedKey PresharedKey::from_hex(std::string_view hex) {
  if (hex.size() != kKeySize * 2) throw std::invalid_argument("key must be 64 hex characters");
  std::array<std::uint8_t, kKeySize> bytes{};
  for (std::size_t i = 0; i < kKeySize; ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("key contains a non-hex character");
    bytes[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return PresharedKey(bytes);
}

PresharedKey PresharedKey::derive(std::string_view label) {
  ensure_sodium();
  std::array<std::uint8_t, kKeySize> bytes{};
  crypto_generichash(bytes.data(), bytes.size(), reinterpret_cast<const unsigned char*>(label.data()),
                     label.size(), nullptr, 0);
  return PresharedKey(bytes);
}

PresharedKey PresharedKey::random() {
  ensure_sodium();
  std::array<std::uint8_t, kKeySize> bytes{};
  randombytes_buf(bytes.data(), bytes.size());
  return PresharedKey(bytes);
}

std::vector<std::uint8_t> encode_frame(MsgType type, std::span<const std::uint8_t> payload,
                                       const PresharedKey& key, std::uint64_t counter) {
  ensure_sodium();
  NonceSalt salt;
  randombytes_buf(salt.data(), salt.size());
  return encode_frame(type, payload, key, counter, salt);
}

std::vector<std::uint8_t> encode_frame(MsgType type, std::span<const std::uint8_t> payload,
                                       const PresharedKey& key, std::uint64_t counter,
                                       const NonceSalt& salt) {
  static_assert(crypto_aead_chacha20poly1305_IETF_NPUBBYTES == kNonceSize);
  static_assert(crypto_aead_chacha20poly1305_IETF_ABYTES == kTagSize);
  static_assert(crypto_aead_chacha20poly1305_IETF_KEYBYTES == kKeySize);
  ensure_sodium();
  if (payload.size() > kMaxPayload) throw FrameError(FrameErrc::PayloadTooLarge);
  if (counter == std::numeric_limits<std::uint64_t>::max()) throw FrameError(FrameErrc::CounterExhausted);

  std::vector<std::uint8_t> out(kFrameOverhead + payload.size());
  out[0] = kMagic0;
  out[1] = kMagic1;
  out[2] = kVersion;
  out[3] = static_cast<std::uint8_t>(type);
  put_be32(&out[4], static_cast<std::uint32_t>(payload.size()));
  put_be64(&out[8], counter);
  std::copy(salt.begin(), salt.end(), out.begin() + 16);

  unsigned long long tag_len = 0;
  crypto_aead_chacha20poly1305_ietf_encrypt_detached(
      out.data() + kHeaderSize, out.data() + kHeaderSize + payload.size(), &tag_len, payload.data(),
      payload.size(), out.data(), kAssociatedDataSize, nullptr, out.data() + kAssociatedDataSize,
      key.data());
  return out;
}

FrameHeader parse_header(std::span<const std::uint8_t> header) {
  if (header.size() < kHeaderSize) throw FrameError(FrameErrc::Truncated);
  if (header[0] != kMagic0 || header[1] != kMagic1) throw FrameError(FrameErrc::BadMagic);
  if (header[2] != kVersion) throw FrameError(FrameErrc::UnsupportedVersion);
  FrameHeader h;
  h.raw_type = header[3];
  h.payload_len = get_be32(header.data() + 4);
  if (h.payload_len > kMaxPayload) throw FrameError(FrameErrc::PayloadTooLarge);
  return h;
}

DecodedFrame decode_frame(std::span<const std::uint8_t> bytes, const PresharedKey& key,
                          std::uint64_t last_counter) {
  ensure_sodium();
  auto header = parse_header(bytes);
  if (bytes.size() < header.frame_size()) throw FrameError(FrameErrc::Truncated);
  // Extra trailing bytes shift where the tag would be; authentication is what rejects them.
  if (bytes.size() != header.frame_size()) throw FrameError(FrameErrc::AuthFailure);

  const std::uint8_t* ciphertext = bytes.data() + kHeaderSize;
  const std::uint8_t* tag = ciphertext + header.payload_len;
  std::vector<std::uint8_t> plain(header.payload_len);
  if (crypto_aead_chacha20poly1305_ietf_decrypt_detached(
          plain.data(), nullptr, ciphertext, header.payload_len, tag, bytes.data(),
          kAssociatedDataSize, bytes.data() + kAssociatedDataSize, key.data()) != 0) {
    throw FrameError(FrameErrc::AuthFailure);
  }
  if (!known_type(header.raw_type)) throw FrameError(FrameErrc::UnknownMessageType);
  auto counter = get_be64(bytes.data() + kAssociatedDataSize);
  if (counter <= last_counter) throw FrameError(FrameErrc::ReplayDetected);
  return DecodedFrame{static_cast<MsgType>(header.raw_type), std::move(plain), counter};
}

}  // namespace fogdeck::wire
