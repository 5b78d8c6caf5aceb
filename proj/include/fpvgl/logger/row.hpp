#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fpvgl/mavlink/messages.hpp"

namespace fpvgl::logger {

// Latest message of each kind seen so far.
struct TelemetrySnapshot {
  std::optional<mavlink::Heartbeat> heartbeat;
  std::optional<mavlink::GpsRawInt> gps_raw;
  std::optional<mavlink::Attitude> attitude;
  std::optional<mavlink::GlobalPositionInt> global_position;
  std::optional<mavlink::VfrHud> vfr_hud;
  std::optional<mavlink::RcChannels> rc_channels;
  std::optional<mavlink::ServoOutputRaw> servo_output;

  void apply(const mavlink::Message& message);
  // Milliseconds since boot of the freshest timestamped message, if any.
  std::optional<std::uint32_t> time_boot_ms() const;
};

// One logged iteration. Numeric fields are NaN when the source message has
// not been received yet.
struct IterationRow {
  std::int64_t wall_ms = 0;
  double time_boot_ms = 0;
  double lat_1e7 = 0;
  double lon_1e7 = 0;
  double alt_mm = 0;
  double rel_alt_mm = 0;
  double vx_cms = 0;
  double vy_cms = 0;
  double vz_cms = 0;
  double hdg_cdeg = 0;
  double groundspeed_ms = 0;
  double climb_ms = 0;
  double roll_rad = 0;
  double pitch_rad = 0;
  double yaw_rad = 0;
  std::array<double, 8> rc_us{};
  std::array<double, 8> servo_us{};
  std::string front_frame;
  std::string bottom_frame;

  bool has_position() const noexcept;
  // NaN compares equal to NaN.
  bool operator==(const IterationRow& other) const noexcept;
};

struct ArmRule {
  double threshold_us = 1100;
  int motors = 4;
  bool armed(const IterationRow& row) const noexcept;
};

// Fills every telemetry field of a row from a snapshot. rel_alt_mm is left
// NaN; the session computes it against its baseline.
IterationRow row_from_snapshot(const TelemetrySnapshot& snapshot);

const std::vector<std::string>& csv_columns();
std::string format_csv_row(const IterationRow& row);
// Throws std::invalid_argument with a description of the bad field.
IterationRow parse_csv_row(std::string_view line);

}  // namespace fpvgl::logger
