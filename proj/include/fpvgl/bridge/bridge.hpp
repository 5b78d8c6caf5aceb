#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "fpvgl/logger/recorder.hpp"
#include "fpvgl/relay/client.hpp"

namespace fpvgl::bridge {

namespace detail {
struct ConsoleServer;
}

struct BridgeOptions {
  relay::Endpoint relay{"127.0.0.1", 5760};
  relay::Endpoint listen{"127.0.0.1", 8765};
  double frame_rate_hz = 5;
  logger::FrameSource* frames = nullptr;  // no frame messages when null
  std::chrono::milliseconds retry_initial{250};
  std::chrono::milliseconds retry_max{5000};
  std::size_t max_queued = 64;  // per console; droppable messages beyond this are discarded
};

// Relay subscriber on one side, WebSocket server for consoles on the other.
// Reconnects to the relay with exponential backoff and tells consoles
// whenever the relay link changes.
class Bridge {
 public:
  explicit Bridge(BridgeOptions options);
  ~Bridge();
  Bridge(const Bridge&) = delete;
  Bridge& operator=(const Bridge&) = delete;

  std::uint16_t port() const noexcept;
  bool relay_connected() const noexcept { return relay_connected_; }
  std::size_t console_count() const;

  std::uint64_t states_sent() const noexcept { return states_sent_; }
  std::uint64_t frames_sent() const noexcept { return frames_sent_; }
  std::uint64_t sticks_forwarded() const noexcept { return sticks_forwarded_; }
  std::uint64_t connect_attempts() const noexcept { return connect_attempts_; }

  void stop();

 private:
  void relay_loop();
  void frame_loop();
  void on_relay_message(const mavlink::Message& message);
  void on_console_text(const std::string& text);
  void set_relay_status(bool connected, const std::string& detail);
  bool sleep_for(std::chrono::milliseconds d);

  BridgeOptions options_;
  std::unique_ptr<detail::ConsoleServer> server_;

  std::mutex mutex_;
  std::condition_variable wake_;
  std::atomic<bool> stopping_{false};
  std::atomic<bool> relay_connected_{false};
  std::shared_ptr<relay::RelayClient> client_;
  logger::TelemetrySnapshot snapshot_;
  bool have_snapshot_ = false;

  std::atomic<std::uint64_t> states_sent_{0};
  std::atomic<std::uint64_t> frames_sent_{0};
  std::atomic<std::uint64_t> sticks_forwarded_{0};
  std::atomic<std::uint64_t> connect_attempts_{0};

  std::thread relay_thread_;
  std::thread frame_thread_;
};

}  // namespace fpvgl::bridge
