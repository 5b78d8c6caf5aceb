#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <variant>

namespace fpvgl::mavlink {

// Field order below is wire order (MAVLink sorts by type size), not the
// declaration order of the XML dialect.

struct Heartbeat {
  std::uint32_t custom_mode = 0;
  std::uint8_t type = 0;
  std::uint8_t autopilot = 0;
  std::uint8_t base_mode = 0;
  std::uint8_t system_status = 0;
  std::uint8_t mavlink_version = 0;

  bool operator==(const Heartbeat&) const = default;
};

struct GpsRawInt {
  std::uint64_t time_usec = 0;
  std::int32_t lat = 0;  // 1e-7 deg
  std::int32_t lon = 0;  // 1e-7 deg
  std::int32_t alt = 0;  // mm
  std::uint16_t eph = 0;
  std::uint16_t epv = 0;
  std::uint16_t vel = 0;  // cm/s
  std::uint16_t cog = 0;  // cdeg
  std::uint8_t fix_type = 0;
  std::uint8_t satellites_visible = 0;

  bool operator==(const GpsRawInt&) const = default;
};

struct Attitude {
  std::uint32_t time_boot_ms = 0;
  float roll = 0;
  float pitch = 0;
  float yaw = 0;
  float rollspeed = 0;
  float pitchspeed = 0;
  float yawspeed = 0;

  bool operator==(const Attitude&) const = default;
};

struct GlobalPositionInt {
  std::uint32_t time_boot_ms = 0;
  std::int32_t lat = 0;           // 1e-7 deg
  std::int32_t lon = 0;           // 1e-7 deg
  std::int32_t alt = 0;           // mm
  std::int32_t relative_alt = 0;  // mm
  std::int16_t vx = 0;            // cm/s, north
  std::int16_t vy = 0;            // cm/s, east
  std::int16_t vz = 0;            // cm/s, down
  std::uint16_t hdg = 0;          // cdeg

  bool operator==(const GlobalPositionInt&) const = default;
};

struct VfrHud {
  float airspeed = 0;
  float groundspeed = 0;
  float alt = 0;
  float climb = 0;
  std::int16_t heading = 0;
  std::uint16_t throttle = 0;

  bool operator==(const VfrHud&) const = default;
};

struct RcChannels {
  std::uint32_t time_boot_ms = 0;
  std::array<std::uint16_t, 18> chan{};  // chan[0] is chan1_raw; 0 = unused
  std::uint8_t chancount = 0;
  std::uint8_t rssi = 0;

  bool operator==(const RcChannels&) const = default;
};

struct ServoOutputRaw {
  std::uint32_t time_usec = 0;
  std::array<std::uint16_t, 8> servo{};
  std::uint8_t port = 0;

  bool operator==(const ServoOutputRaw&) const = default;
};

using Message = std::variant<Heartbeat, GpsRawInt, Attitude, GlobalPositionInt, VfrHud,
                             RcChannels, ServoOutputRaw>;

/// Per-message constants from the public common.xml dialect (v1 lengths).
template <class T>
struct MessageInfo;

template <>
struct MessageInfo<Heartbeat> {
  static constexpr std::uint8_t id = 0;
  static constexpr std::uint8_t length = 9;
  static constexpr std::uint8_t crc_extra = 50;
  static constexpr std::string_view name = "HEARTBEAT";
};
template <>
struct MessageInfo<GpsRawInt> {
  static constexpr std::uint8_t id = 24;
  static constexpr std::uint8_t length = 30;
  static constexpr std::uint8_t crc_extra = 24;
  static constexpr std::string_view name = "GPS_RAW_INT";
};
template <>
struct MessageInfo<Attitude> {
  static constexpr std::uint8_t id = 30;
  static constexpr std::uint8_t length = 28;
  static constexpr std::uint8_t crc_extra = 39;
  static constexpr std::string_view name = "ATTITUDE";
};
template <>
struct MessageInfo<GlobalPositionInt> {
  static constexpr std::uint8_t id = 33;
  static constexpr std::uint8_t length = 28;
  static constexpr std::uint8_t crc_extra = 104;
  static constexpr std::string_view name = "GLOBAL_POSITION_INT";
};
template <>
struct MessageInfo<ServoOutputRaw> {
  static constexpr std::uint8_t id = 36;
  static constexpr std::uint8_t length = 21;
  static constexpr std::uint8_t crc_extra = 222;
  static constexpr std::string_view name = "SERVO_OUTPUT_RAW";
};
template <>
struct MessageInfo<RcChannels> {
  static constexpr std::uint8_t id = 65;
  static constexpr std::uint8_t length = 42;
  static constexpr std::uint8_t crc_extra = 118;
  static constexpr std::string_view name = "RC_CHANNELS";
};
template <>
struct MessageInfo<VfrHud> {
  static constexpr std::uint8_t id = 74;
  static constexpr std::uint8_t length = 20;
  static constexpr std::uint8_t crc_extra = 20;
  static constexpr std::string_view name = "VFR_HUD";
};

struct MessageSpec {
  std::uint8_t id;
  std::uint8_t length;
  std::uint8_t crc_extra;
  std::string_view name;
};

/// Lookup by wire id; nullptr for ids outside the supported set.
const MessageSpec* find_message_spec(std::uint8_t msg_id) noexcept;

std::uint8_t message_id(const Message& m) noexcept;
std::string_view message_name(const Message& m) noexcept;

}  // namespace fpvgl::mavlink
