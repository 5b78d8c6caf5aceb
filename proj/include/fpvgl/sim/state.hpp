#pragma once

#include <cstdint>

#include "fpvgl/common/stick.hpp"
#include "fpvgl/geodesy/geodesy.hpp"

namespace fpvgl::sim {

struct SimConfig {
  double max_horizontal_speed = 1.20;  // m/s
  double max_climb_rate = 1.0;         // m/s
  double max_yaw_rate = 1.0;           // rad/s
  double response_tau = 0.5;           // s
  int tick_rate = 50;                  // Hz
  double gps_noise_sigma = 0.0;        // m, per horizontal axis
  geo::Geodetic origin{43.0009, -78.7873, 200.0};
  std::uint64_t seed = 0;

  // Arming: hold throttle low and yaw right for arm_hold_s. Disarms after
  // resting on the ground for disarm_after_s once it has flown.
  double arm_hold_s = 1.0;
  double disarm_after_s = 1.0;
  double airborne_height = 0.3;

  double dt() const noexcept { return 1.0 / tick_rate; }
  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct SimState {
  double t = 0;
  geo::Enu position{};
  geo::Enu velocity{};
  double yaw = 0;  // rad, 0 = north, clockwise positive, (-pi, pi]
  bool armed = false;
  double arm_altitude = 0;

  std::uint64_t tick = 0;
  StickCommand last_command{};
  geo::Enu accel{};  // commanded acceleration of the last step
  double gesture_s = 0;
  double grounded_s = 0;
  bool airborne = false;

  bool on_ground() const noexcept { return position.u <= 0.0; }
  double ground_speed() const noexcept;
};

double wrap_pi(double angle) noexcept;

}  // namespace fpvgl::sim
