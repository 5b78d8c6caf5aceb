#pragma once

#include <memory>
#include <vector>

#include "fpvgl/common/latest.hpp"
#include "fpvgl/sim/scenario.hpp"
#include "fpvgl/sim/state.hpp"

namespace fpvgl::sim {

class Pilot {
 public:
  virtual ~Pilot() = default;
  virtual StickCommand command(const SimState& state) = 0;
  virtual bool finished() const { return false; }
};

// Flies a scenario with a waypoint controller that has perfect knowledge of
// the true state. Deterministic.
class ScriptedPilot : public Pilot {
 public:
  enum class Phase { Idle, Arm, Climb, Hold, Follow, Settle, Descend, Done };

  ScriptedPilot(Scenario scenario, SimConfig config);

  StickCommand command(const SimState& state) override;
  bool finished() const override { return phase_ == Phase::Done; }
  Phase phase() const noexcept { return phase_; }

  // Expected time from arming to disarming.
  double nominal_duration() const;

  double cruise_altitude() const noexcept { return cruise_alt_; }
  const std::vector<Point2>& path() const noexcept { return path_; }

  static constexpr double kIdleSeconds = 2.0;
  static constexpr double kHoverSeconds = 12.0;
  static constexpr double kCruiseSpeed = 1.0;

 private:
  StickCommand fly_to(const SimState& s, Point2 target, double alt, double speed) const;
  void enter(Phase next, const SimState& s);

  Scenario scenario_;
  SimConfig config_;
  std::vector<Point2> path_;
  double cruise_alt_;
  double heading_;
  Phase phase_ = Phase::Idle;
  double phase_start_ = 0;
  double hold_since_ = -1;
  std::size_t carrot_ = 0;
};

const char* to_string(ScriptedPilot::Phase phase) noexcept;

// Samples whatever the operator last sent; silence means centered sticks.
class LivePilot : public Pilot {
 public:
  explicit LivePilot(std::shared_ptr<Latest<StickCommand>> cell) : cell_(std::move(cell)) {}
  StickCommand command(const SimState&) override { return cell_->load_or(StickCommand{}).clamped(); }

 private:
  std::shared_ptr<Latest<StickCommand>> cell_;
};

}  // namespace fpvgl::sim
