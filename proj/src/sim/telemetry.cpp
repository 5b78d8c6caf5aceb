#include "fpvgl/sim/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fpvgl/sim/dynamics.hpp"

namespace fpvgl::sim {

namespace {

constexpr double kGravity = 9.80665;
constexpr double kMaxTilt = 0.6;  // rad

std::int32_t scaled(double v, double scale) { return static_cast<std::int32_t>(std::llround(v * scale)); }

std::int16_t cm_s(double v) {
  return static_cast<std::int16_t>(std::clamp<long long>(std::llround(v * 100), -32767, 32767));
}

double heading_deg(double yaw) {
  double d = yaw * 180.0 / std::numbers::pi;
  if (d < 0) d += 360.0;
  return d;
}

std::uint16_t servo_pwm(double v) {
  return static_cast<std::uint16_t>(std::clamp<long>(std::lround(v), 1100, 1900));
}

}  // namespace

std::uint16_t stick_to_pwm(double value) noexcept {
  const double v = value != value ? 0.0 : std::clamp(value, -1.0, 1.0);
  return static_cast<std::uint16_t>(std::lround(1500 + 500 * v));
}

TelemetrySynth::TelemetrySynth(const SimConfig& config) : config_(config), rng_(config.seed) {}

std::vector<mavlink::Message> TelemetrySynth::tick(const SimState& s) {
  using namespace mavlink;
  std::vector<Message> out;
  const auto boot_ms = static_cast<std::uint32_t>(std::llround(s.t * 1000));
  const auto usec = static_cast<std::uint64_t>(std::llround(s.t * 1e6));
  const StickCommand& cmd = s.last_command;

  if (s.tick % static_cast<std::uint64_t>(config_.tick_rate) == 0) {
    Heartbeat hb;
    hb.type = 2;        // quadrotor
    hb.autopilot = 12;  // PX4
    hb.base_mode = static_cast<std::uint8_t>(0x01 | 0x10 | (s.armed ? 0x80 : 0));
    hb.custom_mode = 3u << 16;  // position control
    hb.system_status = s.armed ? 4 : 3;
    hb.mavlink_version = 3;
    out.emplace_back(hb);
  }

  geo::Enu fix = s.position;
  if (config_.gps_noise_sigma > 0) {
    fix.e += config_.gps_noise_sigma * noise_(rng_);
    fix.n += config_.gps_noise_sigma * noise_(rng_);
  }
  last_fix_ = fix;
  const geo::Geodetic g = geo::enu_to_geodetic(fix, config_.origin);
  const double speed = s.ground_speed();
  const double hdg = heading_deg(s.yaw);

  GlobalPositionInt gpi;
  gpi.time_boot_ms = boot_ms;
  gpi.lat = scaled(g.lat, 1e7);
  gpi.lon = scaled(g.lon, 1e7);
  gpi.alt = scaled(g.alt, 1e3);
  gpi.relative_alt = scaled(s.position.u, 1e3);
  gpi.vx = cm_s(s.velocity.n);
  gpi.vy = cm_s(s.velocity.e);
  gpi.vz = cm_s(-s.velocity.u);
  gpi.hdg = static_cast<std::uint16_t>(std::lround(hdg * 100) % 36000);
  out.emplace_back(gpi);

  GpsRawInt raw;
  raw.time_usec = usec;
  raw.lat = gpi.lat;
  raw.lon = gpi.lon;
  raw.alt = gpi.alt;
  raw.eph = 80;
  raw.epv = 120;
  raw.vel = static_cast<std::uint16_t>(std::lround(speed * 100));
  if (speed > 0.05) {
    double cog = std::atan2(s.velocity.e, s.velocity.n) * 180.0 / std::numbers::pi;
    if (cog < 0) cog += 360.0;
    raw.cog = static_cast<std::uint16_t>(std::lround(cog * 100) % 36000);
  } else {
    raw.cog = 65535;
  }
  raw.fix_type = 3;
  raw.satellites_visible = 14;
  out.emplace_back(raw);

  const geo::Enu f = forward_axis(s.yaw);
  const geo::Enu r = right_axis(s.yaw);
  const double a_fwd = s.accel.e * f.e + s.accel.n * f.n;
  const double a_right = s.accel.e * r.e + s.accel.n * r.n;
  Attitude att;
  att.time_boot_ms = boot_ms;
  att.roll = static_cast<float>(std::clamp(std::atan(a_right / kGravity), -kMaxTilt, kMaxTilt));
  att.pitch = static_cast<float>(std::clamp(-std::atan(a_fwd / kGravity), -kMaxTilt, kMaxTilt));
  att.yaw = static_cast<float>(s.yaw);
  att.yawspeed = s.armed ? static_cast<float>(cmd.yaw * config_.max_yaw_rate) : 0.0f;
  out.emplace_back(att);

  VfrHud hud;
  hud.airspeed = static_cast<float>(speed);
  hud.groundspeed = static_cast<float>(speed);
  hud.alt = static_cast<float>(g.alt);
  hud.climb = static_cast<float>(s.velocity.u);
  hud.heading = static_cast<std::int16_t>(std::lround(hdg) % 360);
  hud.throttle = s.armed ? static_cast<std::uint16_t>(std::lround(50 + 50 * cmd.throttle)) : 0;
  out.emplace_back(hud);

  RcChannels rc;
  rc.time_boot_ms = boot_ms;
  rc.chan[0] = stick_to_pwm(cmd.roll);
  rc.chan[1] = stick_to_pwm(cmd.pitch);
  rc.chan[2] = stick_to_pwm(cmd.throttle);
  rc.chan[3] = stick_to_pwm(cmd.yaw);
  for (int i = 4; i < 8; ++i) rc.chan[i] = 1000;
  rc.chancount = 8;
  rc.rssi = 255;
  out.emplace_back(rc);

  ServoOutputRaw servo;
  servo.time_usec = static_cast<std::uint32_t>(usec);
  if (s.armed) {
    // Quad-X: front-right, rear-left, front-left, rear-right.
    const double base = 1500 + 300 * cmd.throttle;
    const double p = 100 * cmd.pitch, rl = 100 * cmd.roll, y = 100 * cmd.yaw;
    servo.servo[0] = servo_pwm(base - p - rl + y);
    servo.servo[1] = servo_pwm(base + p + rl + y);
    servo.servo[2] = servo_pwm(base - p + rl - y);
    servo.servo[3] = servo_pwm(base + p - rl - y);
  } else {
    for (int i = 0; i < 4; ++i) servo.servo[i] = 1000;
  }
  out.emplace_back(servo);
  return out;
}

}  // namespace fpvgl::sim
