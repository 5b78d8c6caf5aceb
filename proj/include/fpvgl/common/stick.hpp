#pragma once

#include <algorithm>

namespace fpvgl {

/// Normalized pilot input, each axis in [-1, 1]. Positive pitch is forward,
/// positive roll is right, positive yaw is clockwise, positive throttle is up.
struct StickCommand {
  double roll = 0;
  double pitch = 0;
  double yaw = 0;
  double throttle = 0;

  StickCommand clamped() const noexcept {
    auto c = [](double v) { return v != v ? 0.0 : std::clamp(v, -1.0, 1.0); };
    return {c(roll), c(pitch), c(yaw), c(throttle)};
  }

  bool operator==(const StickCommand&) const = default;
};

}  // namespace fpvgl
