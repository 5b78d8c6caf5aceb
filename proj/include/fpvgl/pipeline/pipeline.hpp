#pragma once

#include <cstdint>
#include <memory>
#include <mutex>

#include "fpvgl/common/latest.hpp"
#include "fpvgl/logger/recorder.hpp"
#include "fpvgl/relay/client.hpp"
#include "fpvgl/relay/server.hpp"
#include "fpvgl/sim/runner.hpp"

namespace fpvgl::pipeline {

// Synthetic camera pair stamped with the snapshot's boot time.
class SyntheticFrames : public logger::FrameSource {
 public:
  logger::FramePair capture(const logger::TelemetrySnapshot& snapshot) override;
};

// Logs a running simulation on the simulation clock: one row every
// 1/rate_hz of simulated time, stamped base_wall_ms + t.
class SimLoggerSink : public sim::TickSink {
 public:
  SimLoggerSink(logger::SessionWriter& writer, logger::FrameSource& frames, double rate_hz,
                std::int64_t base_wall_ms);

  void on_tick(const sim::TickOutput& out) override;
  std::size_t rows() const noexcept { return writer_.row_count(); }

 private:
  logger::SessionWriter& writer_;
  logger::FrameSource& frames_;
  logger::TelemetrySnapshot current_;
  std::int64_t interval_ms_;
  std::int64_t base_wall_ms_;
  std::int64_t next_ms_ = 0;
};

// Publishes every encoded frame of a tick to a relay.
class SimRelaySink : public sim::TickSink {
 public:
  explicit SimRelaySink(relay::RelayServer& server) : server_(server) {}
  void on_tick(const sim::TickOutput& out) override {
    for (const auto& f : out.frames) server_.publish(f);
  }

 private:
  relay::RelayServer& server_;
};

// Folds relay traffic into a latest-value telemetry snapshot.
class TelemetryFeed {
 public:
  TelemetryFeed() : cell_(std::make_shared<Latest<logger::TelemetrySnapshot>>()) {}

  relay::RelayClient::Callback callback();
  void apply(const mavlink::Message& message);

  const Latest<logger::TelemetrySnapshot>& cell() const noexcept { return *cell_; }
  std::uint64_t messages() const noexcept { return cell_->version(); }

 private:
  std::mutex mutex_;
  logger::TelemetrySnapshot current_;
  std::shared_ptr<Latest<logger::TelemetrySnapshot>> cell_;
};

struct SimSessionResult {
  std::filesystem::path session_dir;
  sim::SimRunSummary summary;
  logger::SessionManifest manifest;
  double nominal_duration_s = 0;
};

// Runs a scripted scenario in simulated time and logs it as a session under
// root. Extra sinks (a relay, say) see every tick as well.
SimSessionResult simulate_session(const sim::SimConfig& config, const sim::Scenario& scenario,
                                  const std::filesystem::path& root, double log_rate_hz,
                                  std::int64_t start_wall_ms, std::span<sim::TickSink* const> extra = {});

// Same with any pilot and run options. nominal_duration_s is 0 unless the
// pilot is scripted.
SimSessionResult simulate_session(const sim::SimConfig& config, const sim::Scenario& scenario, sim::Pilot& pilot,
                                  const std::filesystem::path& root, double log_rate_hz,
                                  std::int64_t start_wall_ms, std::span<sim::TickSink* const> extra,
                                  const sim::RunOptions& options);

}  // namespace fpvgl::pipeline
