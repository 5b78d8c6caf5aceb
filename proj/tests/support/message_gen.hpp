#pragma once

// Random message generators for round-trip and fuzz tests.

#include <cstdint>
#include <random>
#include <vector>

#include "fpvgl/mavlink/messages.hpp"

namespace fpvgl::testing {

class MessageGen {
 public:
  explicit MessageGen(std::uint64_t seed) : rng_(seed) {}

  template <class T>
  T uniform_int(T lo, T hi) {
    return static_cast<T>(std::uniform_int_distribution<long long>(lo, hi)(rng_));
  }
  std::uint64_t u64() { return rng_(); }
  float real(double lo, double hi) {
    return static_cast<float>(std::uniform_real_distribution<double>(lo, hi)(rng_));
  }
  std::uint16_t pwm() {
    switch (uniform_int<int>(0, 5)) {
      case 0: return 0;
      case 1: return 65535;
      default: return uniform_int<std::uint16_t>(800, 2200);
    }
  }

  mavlink::Message message(int kind) {
    using namespace mavlink;
    switch (kind % 7) {
      case 0: {
        Heartbeat m;
        m.custom_mode = static_cast<std::uint32_t>(u64());
        m.type = uniform_int<std::uint8_t>(0, 255);
        m.autopilot = uniform_int<std::uint8_t>(0, 255);
        m.base_mode = uniform_int<std::uint8_t>(0, 255);
        m.system_status = uniform_int<std::uint8_t>(0, 255);
        m.mavlink_version = uniform_int<std::uint8_t>(0, 255);
        return m;
      }
      case 1: {
        GpsRawInt m;
        m.time_usec = u64();
        m.lat = uniform_int<std::int32_t>(-900000000, 900000000);
        m.lon = uniform_int<std::int32_t>(-1800000000, 1800000000);
        m.alt = uniform_int<std::int32_t>(-500000, 50000000);
        m.eph = uniform_int<std::uint16_t>(0, 65535);
        m.epv = uniform_int<std::uint16_t>(0, 65535);
        m.vel = uniform_int<std::uint16_t>(0, 65535);
        m.cog = uniform_int<std::uint16_t>(0, 35999);
        m.fix_type = uniform_int<std::uint8_t>(0, 8);
        m.satellites_visible = uniform_int<std::uint8_t>(0, 255);
        return m;
      }
      case 2: {
        Attitude m;
        m.time_boot_ms = static_cast<std::uint32_t>(u64());
        m.roll = real(-3.14159, 3.14159);
        m.pitch = real(-1.5708, 1.5708);
        m.yaw = real(-3.14159, 3.14159);
        m.rollspeed = real(-20, 20);
        m.pitchspeed = real(-20, 20);
        m.yawspeed = real(-20, 20);
        return m;
      }
      case 3: {
        GlobalPositionInt m;
        m.time_boot_ms = static_cast<std::uint32_t>(u64());
        m.lat = uniform_int<std::int32_t>(-900000000, 900000000);
        m.lon = uniform_int<std::int32_t>(-1800000000, 1800000000);
        m.alt = uniform_int<std::int32_t>(-500000, 50000000);
        m.relative_alt = uniform_int<std::int32_t>(-500000, 500000);
        m.vx = uniform_int<std::int16_t>(-32768, 32767);
        m.vy = uniform_int<std::int16_t>(-32768, 32767);
        m.vz = uniform_int<std::int16_t>(-32768, 32767);
        m.hdg = uniform_int<std::uint16_t>(0, 35999);
        return m;
      }
      case 4: {
        VfrHud m;
        m.airspeed = real(0, 50);
        m.groundspeed = real(0, 50);
        m.alt = real(-500, 9000);
        m.climb = real(-20, 20);
        m.heading = uniform_int<std::int16_t>(0, 359);
        m.throttle = uniform_int<std::uint16_t>(0, 100);
        return m;
      }
      case 5: {
        RcChannels m;
        m.time_boot_ms = static_cast<std::uint32_t>(u64());
        for (auto& c : m.chan) c = pwm();
        m.chancount = uniform_int<std::uint8_t>(0, 18);
        m.rssi = uniform_int<std::uint8_t>(0, 255);
        return m;
      }
      default: {
        ServoOutputRaw m;
        m.time_usec = static_cast<std::uint32_t>(u64());
        for (auto& s : m.servo) s = pwm();
        m.port = uniform_int<std::uint8_t>(0, 255);
        return m;
      }
    }
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace fpvgl::testing
