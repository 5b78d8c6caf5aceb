#include "fpvgl/bridge/protocol.hpp"

#include <boost/beast/core/detail/base64.hpp>
#include <cmath>
#include <numbers>

#include "json.hpp"

namespace fpvgl::bridge {

using Json = nlohmann::ordered_json;
namespace b64 = boost::beast::detail::base64;

std::string state_message(const mavlink::GlobalPositionInt& gpi, const std::optional<mavlink::Attitude>& attitude) {
  Json j;
  j["type"] = "state";
  j["t"] = gpi.time_boot_ms / 1000.0;
  j["lat"] = gpi.lat * 1e-7;
  j["lon"] = gpi.lon * 1e-7;
  j["relAlt"] = gpi.relative_alt / 1000.0;
  j["groundSpeed"] = std::hypot(static_cast<double>(gpi.vx), static_cast<double>(gpi.vy)) / 100.0;
  j["climb"] = -gpi.vz / 100.0;
  if (gpi.hdg != 65535) {
    j["yawDeg"] = gpi.hdg / 100.0;
  } else if (attitude) {
    double deg = attitude->yaw * 180.0 / std::numbers::pi;
    if (deg < 0) deg += 360.0;
    j["yawDeg"] = deg;
  } else {
    j["yawDeg"] = nullptr;
  }
  return j.dump();
}

std::string frame_message(std::string_view view, std::span<const std::uint8_t> png) {
  if (view != "front" && view != "bottom") throw ProtocolError("unknown view '" + std::string(view) + "'");
  Json j;
  j["type"] = "frame";
  j["view"] = view;
  j["data"] = base64_encode(png);
  return j.dump();
}

std::string status_message(bool relay_connected, std::string_view detail) {
  Json j;
  j["type"] = "status";
  j["relay"] = relay_connected ? "connected" : "disconnected";
  j["detail"] = detail;
  return j.dump();
}

StickMessage parse_stick(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception&) {
    throw ProtocolError("message is not valid JSON");
  }
  if (!j.is_object()) throw ProtocolError("message is not an object");
  if (j.value("type", "") != "stick") throw ProtocolError("not a stick message");
  auto axis = [&](const char* name) {
    const auto it = j.find(name);
    if (it == j.end() || !it->is_number()) throw ProtocolError(std::string("stick message lacks ") + name);
    return it->get<double>();
  };
  StickMessage m;
  if (j.contains("t") && j["t"].is_number()) m.t = j["t"].get<double>();
  m.command = StickCommand{axis("roll"), axis("pitch"), axis("yaw"), axis("throttle")}.clamped();
  return m;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(b64::encoded_size(bytes.size()), '\0');
  out.resize(b64::encode(out.data(), bytes.data(), bytes.size()));
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ProtocolError("invalid base64");
  std::string_view body = text;
  for (int i = 0; i < 2 && body.ends_with('='); ++i) body.remove_suffix(1);
  std::string out(b64::decoded_size(text.size()), '\0');
  const auto [written, read] = b64::decode(out.data(), body.data(), body.size());
  if (read != body.size()) throw ProtocolError("invalid base64");
  out.resize(written);
  return out;
}

}  // namespace fpvgl::bridge
