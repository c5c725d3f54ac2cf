#pragma once

// Blocking TCP sockets with deadlines, and a framed connection on top.

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fogdeck/wire.hpp"

namespace fogdeck::net {

enum class NetErrc { ConnectFailed, Timeout, Closed, Io };

class NetError : public std::runtime_error {
 public:
  NetError(NetErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  NetErrc code() const noexcept { return code_; }

 private:
  NetErrc code_;
};

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept;
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  bool valid() const noexcept { return fd_ >= 0; }
  int fd() const noexcept { return fd_; }

  /// Reads whatever is available (at most buf.size()), waiting up to `timeout`.
  /// Returns 0 on timeout; throws NetError(Closed) on EOF.
  std::size_t read_some(std::span<std::uint8_t> buf, std::chrono::milliseconds timeout);
  void write_all(std::span<const std::uint8_t> data, std::chrono::milliseconds timeout);

  /// Wakes any thread blocked on this socket; the fd stays owned.
  void shutdown() noexcept;
  void close() noexcept;

  std::string peer_address() const;

 private:
  int fd_ = -1;
};

Socket connect_tcp(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout);

class Listener {
 public:
  /// Port 0 picks an ephemeral port.
  Listener(const std::string& host, std::uint16_t port);
  ~Listener();
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  /// Returns nullopt on timeout or after close().
  std::optional<Socket> accept(std::chrono::milliseconds timeout);
  void close() noexcept;

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace fogdeck::net

namespace fogdeck::wire {

/// One TCP connection carrying frames under one key. Each direction keeps its
/// own counter: outgoing frames number 1, 2, 3...; incoming frames must be
/// strictly increasing. send() may be called from several threads; receive()
/// from one.
class FramedConnection {
 public:
  FramedConnection(net::Socket socket, PresharedKey key);

  void send(MsgType type, std::span<const std::uint8_t> payload);
  /// Writes pre-encoded bytes verbatim (used to exercise tamper/replay paths).
  void send_raw(std::span<const std::uint8_t> bytes);
  std::vector<std::uint8_t> last_sent_frame() const;
  /// Encodes with the next counter without sending.
  std::vector<std::uint8_t> encode_next(MsgType type, std::span<const std::uint8_t> payload);

  /// Next authenticated frame, or nullopt on timeout. Throws FrameError for a
  /// rejected frame (its bytes are consumed, so the stream stays aligned unless
  /// the error is structural) and NetError(Closed) on EOF.
  std::optional<DecodedFrame> receive(std::chrono::milliseconds timeout);

  /// True when the last FrameError left the stream unusable.
  bool desynchronized() const noexcept { return desync_; }

  std::string peer_address() const { return peer_; }
  void shutdown() noexcept { socket_.shutdown(); }

  std::chrono::milliseconds send_timeout{2000};

 private:
  net::Socket socket_;
  PresharedKey key_;
  std::string peer_;
  mutable std::mutex send_mutex_;
  std::uint64_t send_counter_ = 0;
  std::vector<std::uint8_t> last_sent_;
  std::uint64_t recv_counter_ = 0;
  std::vector<std::uint8_t> inbuf_;
  bool desync_ = false;
};

}  // namespace fogdeck::wire
