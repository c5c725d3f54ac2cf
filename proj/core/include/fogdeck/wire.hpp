#pragma once

// Encrypted, authenticated frames exchanged with fog nodes.
//
//   offset  size  field
//   0       2     magic 0x46 0x44 ("FD")
//   2       1     version 0x01
//   3       1     msg_type
//   4       4     payload_len, big-endian (length of ciphertext)
//   8       12    nonce = send counter (8 bytes, big-endian) || 4 random bytes
//   20      n     ciphertext
//   20+n    16    tag
//
// Cipher: ChaCha20-Poly1305 (IETF) under a 256-bit pre-shared key. Bytes 0..7
// are the associated data.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fogdeck::wire {

enum class MsgType : std::uint8_t {
  Hello = 0x01,
  ReadingBatch = 0x02,
  Instruction = 0x03,
  Ack = 0x04,
  Health = 0x05,
  Error = 0x06,
};

std::string_view to_string(MsgType t) noexcept;

inline constexpr std::uint8_t kMagic0 = 0x46;
inline constexpr std::uint8_t kMagic1 = 0x44;
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::size_t kAssociatedDataSize = 8;
inline constexpr std::size_t kNonceSize = 12;
inline constexpr std::size_t kHeaderSize = kAssociatedDataSize + kNonceSize;  // 20
inline constexpr std::size_t kTagSize = 16;
inline constexpr std::size_t kFrameOverhead = kHeaderSize + kTagSize;  // 36
inline constexpr std::size_t kMaxPayload = std::size_t{1} << 20;
inline constexpr std::size_t kKeySize = 32;

/// 32-byte key provisioned per fog node. Deliberately has no string or stream
/// conversion so it cannot end up in a frame or a log line.
class PresharedKey {
 public:
  PresharedKey() = default;
  explicit PresharedKey(const std::array<std::uint8_t, kKeySize>& bytes) : bytes_(bytes) {}

  /// 64 hex characters. Throws std::invalid_argument.
  static PresharedKey from_hex(std::string_view hex);
  /// Deterministic key from a label (BLAKE2b). For simulations and tests only.
  static PresharedKey derive(std::string_view label);
  static PresharedKey random();

  const std::uint8_t* data() const noexcept { return bytes_.data(); }
  bool operator==(const PresharedKey&) const = default;

 private:
  std::array<std::uint8_t, kKeySize> bytes_{};
};

enum class FrameErrc {
  PayloadTooLarge,
  CounterExhausted,
  BadMagic,
  UnsupportedVersion,
  UnknownMessageType,
  AuthFailure,
  ReplayDetected,
  Truncated,
};

std::string_view to_string(FrameErrc e) noexcept;

class FrameError : public std::runtime_error {
 public:
  explicit FrameError(FrameErrc code);
  FrameErrc code() const noexcept { return code_; }

 private:
  FrameErrc code_;
};

using NonceSalt = std::array<std::uint8_t, 4>;

/// Encodes one frame with a fresh random nonce salt.
std::vector<std::uint8_t> encode_frame(MsgType type, std::span<const std::uint8_t> payload,
                                       const PresharedKey& key, std::uint64_t counter);

/// Same, with a caller-chosen salt (test vectors).
std::vector<std::uint8_t> encode_frame(MsgType type, std::span<const std::uint8_t> payload,
                                       const PresharedKey& key, std::uint64_t counter,
                                       const NonceSalt& salt);

struct FrameHeader {
  std::uint8_t raw_type = 0;
  std::uint32_t payload_len = 0;

  std::size_t frame_size() const noexcept { return kFrameOverhead + payload_len; }
};

/// Structural checks on the first 20 bytes: magic, version, length bound.
FrameHeader parse_header(std::span<const std::uint8_t> header);

struct DecodedFrame {
  MsgType type;
  std::vector<std::uint8_t> payload;
  std::uint64_t counter;
};

/// Decodes exactly one frame occupying all of `bytes`. Checks magic, version
/// and tag, then requires counter > last_counter. No plaintext is released on
/// any failure.
DecodedFrame decode_frame(std::span<const std::uint8_t> bytes, const PresharedKey& key,
                          std::uint64_t last_counter);

}  // namespace fogdeck::wire
