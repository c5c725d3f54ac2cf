#include "fogdeck/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace fogdeck::net {

namespace {

int wait_fd(int fd, short events, std::chrono::milliseconds timeout) {
  pollfd p{fd, events, 0};
  for (;;) {
    int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) throw NetError(NetErrc::Io, std::string("poll: ") + std::strerror(errno));
    return rc == 0 ? 0 : p.revents;
  }
}

std::string format_address(const sockaddr_storage& ss) {
  char host[INET6_ADDRSTRLEN] = {0};
  std::uint16_t port = 0;
  if (ss.ss_family == AF_INET) {
    const auto* a = reinterpret_cast<const sockaddr_in*>(&ss);
    ::inet_ntop(AF_INET, &a->sin_addr, host, sizeof host);
    port = ntohs(a->sin_port);
  } else if (ss.ss_family == AF_INET6) {
    const auto* a = reinterpret_cast<const sockaddr_in6*>(&ss);
    ::inet_ntop(AF_INET6, &a->sin6_addr, host, sizeof host);
    port = ntohs(a->sin6_port);
  } else {
    return "unknown";
  }
  return std::string(host) + ":" + std::to_string(port);
}

}  // namespace

Socket::~Socket() { close(); }

Socket::Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

std::size_t Socket::read_some(std::span<std::uint8_t> buf, std::chrono::milliseconds timeout) {
  if (fd_ < 0) throw NetError(NetErrc::Closed, "socket closed");
  int ev = wait_fd(fd_, POLLIN, timeout);
  if (ev == 0) return 0;
  for (;;) {
    ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
    if (n > 0) return static_cast<std::size_t>(n);
    if (n == 0) throw NetError(NetErrc::Closed, "connection closed by peer");
    if (errno == EINTR) continue;
    if (errno == EAGAIN || errno == EWOULDBLOCK) return 0;
    if (errno == ECONNRESET || errno == EBADF || errno == ENOTCONN) {
      throw NetError(NetErrc::Closed, std::string("recv: ") + std::strerror(errno));
    }
    throw NetError(NetErrc::Io, std::string("recv: ") + std::strerror(errno));
  }
}

void Socket::write_all(std::span<const std::uint8_t> data, std::chrono::milliseconds timeout) {
  if (fd_ < 0) throw NetError(NetErrc::Closed, "socket closed");
  auto deadline = std::chrono::steady_clock::now() + timeout;
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL | MSG_DONTWAIT);
    if (n > 0) {
      off += static_cast<std::size_t>(n);
      continue;
    }
    if (n < 0 && errno == EINTR) continue;
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0 || wait_fd(fd_, POLLOUT, left) == 0) {
        throw NetError(NetErrc::Timeout, "send timed out");
      }
      continue;
    }
    throw NetError(NetErrc::Closed, std::string("send: ") + std::strerror(errno));
  }
}

void Socket::shutdown() noexcept {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::close() noexcept {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

std::string Socket::peer_address() const {
  sockaddr_storage ss{};
  socklen_t len = sizeof ss;
  if (fd_ < 0 || ::getpeername(fd_, reinterpret_cast<sockaddr*>(&ss), &len) != 0) return "unknown";
  return format_address(ss);
}

Socket connect_tcp(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  auto service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw NetError(NetErrc::ConnectFailed, "resolve " + host + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no address";
  for (auto* ai = res; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
    if (!s.valid()) continue;
    ::fcntl(s.fd(), F_SETFL, ::fcntl(s.fd(), F_GETFL) | O_NONBLOCK);
    int rc = ::connect(s.fd(), ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno == EINPROGRESS) {
      if (wait_fd(s.fd(), POLLOUT, timeout) == 0) {
        last_error = "connect timed out";
        continue;
      }
      int err = 0;
      socklen_t len = sizeof err;
      ::getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
      rc = err == 0 ? 0 : -1;
      errno = err;
    }
    if (rc != 0) {
      last_error = std::strerror(errno);
      continue;
    }
    int one = 1;
    ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    ::freeaddrinfo(res);
    return s;
  }
  ::freeaddrinfo(res);
  throw NetError(NetErrc::ConnectFailed, host + ":" + service + ": " + last_error);
}

Listener::Listener(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw NetError(NetErrc::Io, std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw NetError(NetErrc::Io, "listen address must be an IPv4 literal: " + host);
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 128) != 0) {
    auto msg = std::string("bind ") + host + ":" + std::to_string(port) + ": " + std::strerror(errno);
    ::close(fd_);
    fd_ = -1;
    throw NetError(NetErrc::Io, msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

Listener::~Listener() { close(); }

std::optional<Socket> Listener::accept(std::chrono::milliseconds timeout) {
  if (fd_ < 0) return std::nullopt;
  int ev = wait_fd(fd_, POLLIN, timeout);
  if (ev == 0 || fd_ < 0) return std::nullopt;
  int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) return std::nullopt;
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return Socket(fd);
}

void Listener::close() noexcept {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

}  // namespace fogdeck::net

namespace fogdeck::wire {

FramedConnection::FramedConnection(net::Socket socket, PresharedKey key)
    : socket_(std::move(socket)), key_(key), peer_(socket_.peer_address()) {}

void FramedConnection::send(MsgType type, std::span<const std::uint8_t> payload) {
  std::lock_guard lock(send_mutex_);
  auto frame = encode_frame(type, payload, key_, send_counter_ + 1);
  ++send_counter_;
  socket_.write_all(frame, send_timeout);
  last_sent_ = std::move(frame);
}

std::vector<std::uint8_t> FramedConnection::encode_next(MsgType type, std::span<const std::uint8_t> payload) {
  std::lock_guard lock(send_mutex_);
  auto frame = encode_frame(type, payload, key_, send_counter_ + 1);
  ++send_counter_;
  return frame;
}

void FramedConnection::send_raw(std::span<const std::uint8_t> bytes) {
  std::lock_guard lock(send_mutex_);
  socket_.write_all(bytes, send_timeout);
  last_sent_.assign(bytes.begin(), bytes.end());
}

std::vector<std::uint8_t> FramedConnection::last_sent_frame() const {
  std::lock_guard lock(send_mutex_);
  return last_sent_;
}

std::optional<DecodedFrame> FramedConnection::receive(std::chrono::milliseconds timeout) {
  auto deadline = std::chrono::steady_clock::now() + timeout;
  std::uint8_t chunk[16384];
  for (;;) {
    if (inbuf_.size() >= kHeaderSize) {
      FrameHeader header;
      try {
        header = parse_header(std::span(inbuf_).first(kHeaderSize));
      } catch (const FrameError&) {
        desync_ = true;
        throw;
      }
      if (inbuf_.size() >= header.frame_size()) {
        std::vector<std::uint8_t> frame(inbuf_.begin(), inbuf_.begin() + static_cast<std::ptrdiff_t>(header.frame_size()));
        inbuf_.erase(inbuf_.begin(), inbuf_.begin() + static_cast<std::ptrdiff_t>(header.frame_size()));
        auto decoded = decode_frame(frame, key_, recv_counter_);
        recv_counter_ = decoded.counter;
        return decoded;
      }
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() < 0) return std::nullopt;
    std::size_t n = 0;
    try {
      n = socket_.read_some(chunk, left);
    } catch (const net::NetError& e) {
      if (e.code() == net::NetErrc::Closed && !inbuf_.empty()) throw FrameError(FrameErrc::Truncated);
      throw;
    }
    if (n == 0) {
      if (std::chrono::steady_clock::now() >= deadline) return std::nullopt;
      continue;
    }
    inbuf_.insert(inbuf_.end(), chunk, chunk + n);
  }
}

}  // namespace fogdeck::wire
