#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fpvgl/common/stick.hpp"
#include "fpvgl/logger/row.hpp"

// Console message protocol. Every message is one JSON object with a "type":
//   state   {type, t, lat, lon, relAlt, groundSpeed, climb, yawDeg}
//   frame   {type, view: "front"|"bottom", data: base64 PNG}
//   status  {type, relay: "connected"|"disconnected", detail}
//   stick   {type, t, roll, pitch, yaw, throttle}       (console to bridge)
namespace fpvgl::bridge {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Built from a GlobalPositionInt; yawDeg falls back to the attitude when the
// heading is unknown, and is null if neither is available.
std::string state_message(const mavlink::GlobalPositionInt& gpi,
                          const std::optional<mavlink::Attitude>& attitude = std::nullopt);

std::string frame_message(std::string_view view, std::span<const std::uint8_t> png);
std::string status_message(bool relay_connected, std::string_view detail = {});

struct StickMessage {
  double t = 0;
  StickCommand command;  // clamped
};

// Throws ProtocolError for malformed JSON, a wrong type, or missing axes.
StickMessage parse_stick(std::string_view text);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::string base64_decode(std::string_view text);

}  // namespace fpvgl::bridge
