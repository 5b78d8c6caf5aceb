#pragma once

#include <random>
#include <vector>

#include "fpvgl/mavlink/messages.hpp"
#include "fpvgl/sim/state.hpp"

namespace fpvgl::sim {

// PWM for a normalized stick value: 1500 +/- 500 us.
std::uint16_t stick_to_pwm(double value) noexcept;

// Message set emitted each tick. Owns the GPS noise generator, so the
// sequence of outputs depends only on the seed and the sequence of states.
class TelemetrySynth {
 public:
  explicit TelemetrySynth(const SimConfig& config);

  std::vector<mavlink::Message> tick(const SimState& state);

  // Local position that was encoded into the last GPS fix, before rounding.
  const geo::Enu& last_fix() const noexcept { return last_fix_; }

 private:
  SimConfig config_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_{0.0, 1.0};
  geo::Enu last_fix_{};
};

}  // namespace fpvgl::sim
