#pragma once

#include <cmath>

#include "fpvgl/sim/state.hpp"

namespace fpvgl::sim {

// Position-mode response: sticks command a body-frame velocity which the
// vehicle approaches with a first-order lag. Integration is exact for a
// command held over dt.
SimState step(const SimState& state, const StickCommand& cmd, const SimConfig& config, double dt);

// Commanded E/N/U velocity for a stick input at the given heading.
geo::Enu commanded_velocity(const StickCommand& cmd, double yaw, const SimConfig& config) noexcept;

// Unit vectors of the body axes in the local frame.
inline geo::Enu forward_axis(double yaw) noexcept { return {std::sin(yaw), std::cos(yaw), 0}; }
inline geo::Enu right_axis(double yaw) noexcept { return {std::cos(yaw), -std::sin(yaw), 0}; }

}  // namespace fpvgl::sim
