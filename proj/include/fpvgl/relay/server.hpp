#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <thread>

#include "fpvgl/common/stick.hpp"
#include "fpvgl/relay/socket.hpp"

namespace fpvgl::relay {

struct RelayOptions {
  std::size_t queue_depth = 1024;  // envelopes buffered per client before it is dropped
  int client_send_buffer = 0;      // SO_SNDBUF for accepted sockets; 0 keeps the OS default

  /// Defaults, with queue_depth overridden by FPVGL_RELAY_QUEUE_DEPTH when set.
  static RelayOptions from_env();
};

/// Fan-out TCP server: every published frame is wrapped in an Envelope and
/// queued to each connected client. Each client has its own writer thread and
/// bounded queue, so publish() never waits on a socket. A client whose queue
/// reaches queue_depth is disconnected.
class RelayServer {
 public:
  using StickHandler = std::function<void(const StickCommand&)>;

  explicit RelayServer(const Endpoint& listen_at, RelayOptions options = {});
  ~RelayServer();
  RelayServer(const RelayServer&) = delete;
  RelayServer& operator=(const RelayServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }

  /// Stamps with the monotonic clock at call time.
  void publish(std::span<const std::uint8_t> frame);
  void publish(std::span<const std::uint8_t> frame, std::uint64_t source_timestamp_us);

  /// Called from client reader threads for every upstream stick packet.
  void on_stick(StickHandler handler);

  std::size_t client_count() const;
  std::uint64_t published() const noexcept { return published_; }
  std::uint64_t dropped_clients() const noexcept { return dropped_clients_; }

  void stop();

 private:
  struct Client;

  void accept_loop();
  void reap();

  RelayOptions options_;
  Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> published_{0};
  std::atomic<std::uint64_t> dropped_clients_{0};

  mutable std::mutex clients_mutex_;
  std::list<std::shared_ptr<Client>> clients_;

  std::mutex publish_mutex_;
  std::mutex stick_mutex_;
  StickHandler stick_handler_;

  std::thread acceptor_;
};

}  // namespace fpvgl::relay
