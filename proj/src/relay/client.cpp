#include "fpvgl/relay/client.hpp"

#include <cerrno>
#include <cstring>

#include "fpvgl/common/time.hpp"
#include "fpvgl/mavlink/codec.hpp"

namespace fpvgl::relay {

RelayClient::RelayClient(const Endpoint& server, Callback on_message)
    : socket_(Socket::connect(server)), callback_(std::move(on_message)) {
  reader_ = std::thread([this] { read_loop(); });
}

RelayClient::~RelayClient() { close(); }

void RelayClient::close() {
  closing_ = true;
  socket_.shutdown();
  if (reader_.joinable()) reader_.join();
}

bool RelayClient::send_stick(const StickCommand& command) {
  if (closed_) return false;
  const auto bytes = encode_stick({monotonic_us(), command});
  std::lock_guard lock(send_mutex_);
  return socket_.send_all(bytes);
}

void RelayClient::read_loop() {
  EnvelopeParser parser;
  std::vector<std::uint8_t> buf(16384);
  for (;;) {
    const long n = socket_.recv_some(buf);
    if (n == 0) return finish(closing_ ? "closed locally" : "closed by server");
    if (n < 0) return finish(closing_ ? "closed locally" : std::string("recv: ") + std::strerror(errno));
    const std::uint64_t arrival = monotonic_us();
    for (const auto& env : parser.feed({buf.data(), static_cast<std::size_t>(n)})) {
      auto ev = mavlink::decode_frame(env.frame);
      auto* decoded = std::get_if<mavlink::DecodedFrame>(&ev);
      if (decoded == nullptr) continue;
      const double delay =
          (static_cast<double>(arrival) - static_cast<double>(env.source_timestamp_us)) * 1e-6;
      {
        std::lock_guard lock(mutex_);
        latencies_.push_back(delay);
      }
      ++received_;
      if (callback_) callback_(env, decoded->message);
    }
  }
}

void RelayClient::finish(std::string reason) {
  {
    std::lock_guard lock(mutex_);
    terminal_error_ = std::move(reason);
    closed_ = true;
  }
  closed_cv_.notify_all();
}

bool RelayClient::wait_closed(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  return closed_cv_.wait_for(lock, timeout, [this] { return closed_.load(); });
}

std::optional<std::string> RelayClient::terminal_error() const {
  std::lock_guard lock(mutex_);
  return terminal_error_;
}

LatencyReport RelayClient::latency_report() const {
  std::lock_guard lock(mutex_);
  return summarize_latency(latencies_);
}

std::vector<double> RelayClient::latency_samples() const {
  std::lock_guard lock(mutex_);
  return latencies_;
}

}  // namespace fpvgl::relay
