#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fpvgl/common/latest.hpp"
#include "fpvgl/logger/session.hpp"

namespace fpvgl::logger {

struct FramePair {
  std::vector<std::uint8_t> front;
  std::vector<std::uint8_t> bottom;
};

class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual FramePair capture(const TelemetrySnapshot& snapshot) = 0;
};

// Samples the latest telemetry and frames on its own clock and writes one
// row per interval. Never waits on the telemetry source.
class SessionRecorder {
 public:
  SessionRecorder(SessionWriter& writer, const Latest<TelemetrySnapshot>& telemetry,
                  FrameSource& frames, double rate_hz);

  // Logs one row stamped wall_ms (bumped by 1 ms if it would not increase).
  std::size_t sample(std::int64_t wall_ms);

  // Logs on the steady clock until `stop` is set or `duration_s` of
  // wall time has passed. Returns the number of rows written by this call.
  std::size_t run(const std::atomic<bool>& stop, std::optional<double> duration_s = std::nullopt);

  double interval_s() const noexcept { return 1.0 / rate_hz_; }

 private:
  SessionWriter& writer_;
  const Latest<TelemetrySnapshot>& telemetry_;
  FrameSource& frames_;
  double rate_hz_;
};

}  // namespace fpvgl::logger
