#include "fpvgl/logger/recorder.hpp"

#include <chrono>
#include <stdexcept>
#include <thread>

#include "fpvgl/common/time.hpp"

namespace fpvgl::logger {

SessionRecorder::SessionRecorder(SessionWriter& writer, const Latest<TelemetrySnapshot>& telemetry,
                                 FrameSource& frames, double rate_hz)
    : writer_(writer), telemetry_(telemetry), frames_(frames), rate_hz_(rate_hz) {
  if (!(rate_hz > 0) || rate_hz > 1000) throw std::invalid_argument("log rate must be in (0, 1000] Hz");
}

std::size_t SessionRecorder::sample(std::int64_t wall_ms) {
  if (writer_.row_count() > 0 && wall_ms <= writer_.last_wall_ms()) wall_ms = writer_.last_wall_ms() + 1;
  const TelemetrySnapshot snap = telemetry_.load_or({});
  const FramePair frames = frames_.capture(snap);
  return writer_.log_iteration(snap, frames.front, frames.bottom, wall_ms);
}

std::size_t SessionRecorder::run(const std::atomic<bool>& stop, std::optional<double> duration_s) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto interval = std::chrono::duration<double>(interval_s());
  std::size_t written = 0;
  for (std::uint64_t k = 0;; ++k) {
    const auto due = start + std::chrono::duration_cast<clock::duration>(interval * static_cast<double>(k));
    if (duration_s && due - start >= std::chrono::duration<double>(*duration_s)) break;
    while (!stop.load() && clock::now() < due) {
      std::this_thread::sleep_until(std::min(due, clock::now() + std::chrono::milliseconds(20)));
    }
    if (stop.load()) break;
    sample(wall_ms_now());
    ++written;
  }
  return written;
}

}  // namespace fpvgl::logger
