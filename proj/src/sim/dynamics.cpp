#include "fpvgl/sim/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fpvgl::sim {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("invalid sim config: ") + what);
}

geo::Enu lerp_exp(const geo::Enu& from, const geo::Enu& to, double decay) {
  return {to.e + (from.e - to.e) * decay, to.n + (from.n - to.n) * decay,
          to.u + (from.u - to.u) * decay};
}

}  // namespace

void SimConfig::validate() const {
  require(max_horizontal_speed > 0, "max_horizontal_speed must be > 0");
  require(max_climb_rate > 0, "max_climb_rate must be > 0");
  require(max_yaw_rate > 0, "max_yaw_rate must be > 0");
  require(response_tau > 0, "response_tau must be > 0");
  require(tick_rate >= 10, "tick_rate must be >= 10");
  require(gps_noise_sigma >= 0, "gps_noise_sigma must be >= 0");
  require(arm_hold_s >= 0 && disarm_after_s >= 0, "arm timings must be >= 0");
}

double SimState::ground_speed() const noexcept { return std::hypot(velocity.e, velocity.n); }

double wrap_pi(double angle) noexcept {
  constexpr double two_pi = 2 * std::numbers::pi;
  double a = std::remainder(angle, two_pi);  // [-pi, pi]
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

geo::Enu commanded_velocity(const StickCommand& raw, double yaw, const SimConfig& config) noexcept {
  const StickCommand cmd = raw.clamped();
  double fwd = cmd.pitch * config.max_horizontal_speed;
  double right = cmd.roll * config.max_horizontal_speed;
  const double norm = std::hypot(fwd, right);
  if (norm > config.max_horizontal_speed) {
    fwd *= config.max_horizontal_speed / norm;
    right *= config.max_horizontal_speed / norm;
  }
  const geo::Enu f = forward_axis(yaw);
  const geo::Enu r = right_axis(yaw);
  return {fwd * f.e + right * r.e, fwd * f.n + right * r.n, cmd.throttle * config.max_climb_rate};
}

SimState step(const SimState& state, const StickCommand& raw, const SimConfig& config, double dt) {
  if (!(dt > 0) || dt > 2.0 / config.tick_rate) {
    throw std::invalid_argument("step: dt out of range");
  }
  const StickCommand cmd = raw.clamped();
  SimState next = state;
  next.t = state.t + dt;
  next.tick = state.tick + 1;
  next.last_command = cmd;

  if (!state.armed) {
    const bool gesture = cmd.throttle <= -0.9 && cmd.yaw >= 0.9;
    next.gesture_s = gesture ? state.gesture_s + dt : 0.0;
    next.velocity = {};
    next.accel = {};
    if (next.position.u < 0) next.position.u = 0;
    if (gesture && next.gesture_s >= config.arm_hold_s - 1e-9) {
      next.armed = true;
      next.arm_altitude = next.position.u;
      next.gesture_s = 0;
      next.grounded_s = 0;
      next.airborne = false;
    }
    return next;
  }

  const geo::Enu vcmd = commanded_velocity(cmd, state.yaw, config);
  const double tau = config.response_tau;
  const double decay = std::exp(-dt / tau);
  const double gain = -std::expm1(-dt / tau);  // 1 - decay, accurate for small dt

  next.accel = {(vcmd.e - state.velocity.e) / tau, (vcmd.n - state.velocity.n) / tau,
                (vcmd.u - state.velocity.u) / tau};
  next.velocity = lerp_exp(state.velocity, vcmd, decay);
  next.position = {
      state.position.e + vcmd.e * dt + (state.velocity.e - vcmd.e) * tau * gain,
      state.position.n + vcmd.n * dt + (state.velocity.n - vcmd.n) * tau * gain,
      state.position.u + vcmd.u * dt + (state.velocity.u - vcmd.u) * tau * gain,
  };
  next.yaw = wrap_pi(state.yaw + cmd.yaw * config.max_yaw_rate * dt);

  if (next.position.u <= 0 && next.velocity.u <= 0) {
    next.position.u = 0;
    next.velocity = {};
  }
  if (next.position.u > config.airborne_height) next.airborne = true;

  if (next.airborne && next.on_ground()) {
    next.grounded_s = state.grounded_s + dt;
    if (next.grounded_s >= config.disarm_after_s - 1e-9) {
      next.armed = false;
      next.airborne = false;
      next.grounded_s = 0;
      next.accel = {};
    }
  } else {
    next.grounded_s = 0;
  }
  return next;
}

}  // namespace fpvgl::sim
