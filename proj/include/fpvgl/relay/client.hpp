#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fpvgl/common/stick.hpp"
#include "fpvgl/mavlink/messages.hpp"
#include "fpvgl/relay/envelope.hpp"
#include "fpvgl/relay/latency.hpp"
#include "fpvgl/relay/socket.hpp"

namespace fpvgl::relay {

/// Ground-side subscriber. Connects in the constructor (throws NetError when
/// refused) and delivers every envelope, decoded, to the callback on a single
/// reader thread in arrival order.
class RelayClient {
 public:
  using Callback = std::function<void(const Envelope&, const mavlink::Message&)>;

  RelayClient(const Endpoint& server, Callback on_message);
  ~RelayClient();
  RelayClient(const RelayClient&) = delete;
  RelayClient& operator=(const RelayClient&) = delete;

  /// Upstream pilot input; returns false once the connection is gone.
  bool send_stick(const StickCommand& command);

  LatencyReport latency_report() const;
  std::vector<double> latency_samples() const;
  std::uint64_t received() const noexcept { return received_; }

  bool connected() const noexcept { return !closed_; }
  /// Waits for the terminal disconnect; true if it happened within `timeout`.
  bool wait_closed(std::chrono::milliseconds timeout);
  /// Reason for the terminal disconnect ("closed by server", errno text, ...).
  std::optional<std::string> terminal_error() const;

  void close();

 private:
  void read_loop();
  void finish(std::string reason);

  Socket socket_;
  Callback callback_;
  std::atomic<bool> closed_{false};
  std::atomic<bool> closing_{false};
  std::atomic<std::uint64_t> received_{0};

  mutable std::mutex mutex_;
  std::condition_variable closed_cv_;
  std::vector<double> latencies_;
  std::optional<std::string> terminal_error_;

  std::mutex send_mutex_;
  std::thread reader_;
};

}  // namespace fpvgl::relay
