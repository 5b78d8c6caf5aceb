#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <thread>

#include "fpvgl/relay/client.hpp"
#include "fpvgl/relay/server.hpp"

namespace fpvgl::relay {

/// Producer of raw MAVLink bytes for the relay's ingestion side.
class ByteSource {
 public:
  virtual ~ByteSource() = default;
  /// Blocks until some bytes arrive; 0 means end of stream.
  virtual std::size_t read(std::span<std::uint8_t> into) = 0;
  /// Unblocks a pending read() from another thread.
  virtual void interrupt() {}
  /// Pilot input travelling toward the vehicle; ignored by one-way sources.
  virtual void forward_stick(const StickCommand&) {}
};

/// Serial device or capture file. Terminals are switched to raw mode at `baud`.
std::unique_ptr<ByteSource> open_device_source(const std::string& path, int baud = 57600);

/// Raw MAVLink byte stream over TCP (e.g. a SITL or mavlink-router port).
std::unique_ptr<ByteSource> open_tcp_source(const Endpoint& at);

/// Another relay or a simulator's relay port: envelopes are unwrapped back to
/// frames and stick input is forwarded upstream.
std::unique_ptr<ByteSource> open_upstream_relay_source(const Endpoint& at);

/// Source spec used by the CLI: "tcp:HOST:PORT", "relay:HOST:PORT", or a path.
std::unique_ptr<ByteSource> open_source(const std::string& spec);

/// A running relay: one ingestion thread parsing the source into frames, each
/// stamped when its bytes came back from read(), published to a RelayServer.
class RelayService {
 public:
  RelayService(std::unique_ptr<ByteSource> source, const Endpoint& listen_at,
               RelayOptions options = RelayOptions::from_env());
  ~RelayService();

  RelayServer& server() noexcept { return server_; }
  std::uint64_t ingested() const noexcept { return ingested_; }
  std::uint64_t rejected() const noexcept { return rejected_; }
  bool source_ended() const noexcept { return ended_; }

  void stop();

 private:
  std::unique_ptr<ByteSource> source_;
  RelayServer server_;
  std::atomic<std::uint64_t> ingested_{0};
  std::atomic<std::uint64_t> rejected_{0};
  std::atomic<bool> ended_{false};
  std::atomic<bool> stopping_{false};
  std::thread ingest_;
};

std::unique_ptr<RelayService> serve(std::unique_ptr<ByteSource> source, const Endpoint& listen_at,
                                    RelayOptions options = RelayOptions::from_env());

}  // namespace fpvgl::relay
