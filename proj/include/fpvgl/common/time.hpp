#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace fpvgl {

/// Microseconds on the host's monotonic clock. CLOCK_MONOTONIC is shared by
/// all processes on one machine, so co-located sender/receiver stamps compare.
inline std::uint64_t monotonic_us() noexcept {
  using namespace std::chrono;
  return static_cast<std::uint64_t>(
      duration_cast<microseconds>(steady_clock::now().time_since_epoch()).count());
}

inline std::int64_t wall_ms_now() noexcept {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

/// "2024-03-01T10:00:00.123Z" (UTC).
std::string format_iso8601_ms(std::int64_t epoch_ms);

/// Inverse of format_iso8601_ms; throws std::invalid_argument on malformed input.
std::int64_t parse_iso8601_ms(std::string_view text);

/// "20240301-100000" (UTC).
std::string format_session_stamp(std::int64_t epoch_ms);

}  // namespace fpvgl
