#pragma once

// Thin RAII wrapper over POSIX TCP sockets (IPv4).

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fpvgl::relay {

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// "host:port"; throws std::invalid_argument.
  static Endpoint parse(std::string_view text);
  std::string str() const;
};

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) noexcept : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  static Socket listen(const Endpoint& at, int backlog = 16);
  static Socket connect(const Endpoint& to);

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  int release() noexcept {
    int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void close() noexcept;
  /// Wakes any thread blocked in send/recv on this socket.
  void shutdown() noexcept;

  std::uint16_t local_port() const;
  void set_nodelay() const;
  void set_send_buffer(int bytes) const;
  void set_recv_buffer(int bytes) const;

  /// Blocks until all bytes are written; false on peer close or error.
  bool send_all(std::span<const std::uint8_t> bytes) const noexcept;
  /// 0 on orderly close, -1 on error, otherwise bytes read.
  long recv_some(std::span<std::uint8_t> into) const noexcept;
  /// Waits for readability; false on timeout.
  bool wait_readable(int timeout_ms) const noexcept;

 private:
  int fd_ = -1;
};

}  // namespace fpvgl::relay
