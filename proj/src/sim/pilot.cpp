#include "fpvgl/sim/pilot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fpvgl/sim/dynamics.hpp"

namespace fpvgl::sim {

namespace {

constexpr double kPathStep = 0.1;     // m between resampled path points
constexpr double kLookahead = 1.0;    // m
constexpr double kArrive = 0.10;      // m
constexpr double kPosGain = 1.0;      // (m/s)/m
constexpr double kAltGain = 1.0;      // (m/s)/m
constexpr double kClimbDamping = 0.3;
constexpr double kYawGain = 2.0;
constexpr double kHoverMargin = 0.05;  // hover this far above the target
constexpr double kCruiseClearance = 0.5;
constexpr double kCircleRadius = 2.5;
constexpr double kFigureHalfWidth = 3.0;
constexpr double kFastDescent = 0.5;  // m/s
constexpr double kSlowDescent = 0.3;  // m/s, below 1 m

Point2 add(Point2 a, Point2 b) { return {a.e + b.e, a.n + b.n}; }
Point2 scale(Point2 a, double k) { return {a.e * k, a.n * k}; }
double dist(Point2 a, Point2 b) { return std::hypot(a.e - b.e, a.n - b.n); }

void append_resampled(std::vector<Point2>& out, Point2 to) {
  if (out.empty()) {
    out.push_back(to);
    return;
  }
  const Point2 from = out.back();
  const double d = dist(from, to);
  const int n = static_cast<int>(std::ceil(d / kPathStep));
  for (int i = 1; i <= n; ++i) {
    const double k = static_cast<double>(i) / n;
    out.push_back({from.e + (to.e - from.e) * k, from.n + (to.n - from.n) * k});
  }
}

double path_length(const std::vector<Point2>& p) {
  double l = 0;
  for (std::size_t i = 1; i < p.size(); ++i) l += dist(p[i - 1], p[i]);
  return l;
}

std::vector<Point2> build_path(const Scenario& s) {
  std::vector<Point2> path;
  append_resampled(path, s.start);
  if (s.task == 1) return path;

  const Point2 o1 = s.obstacles.at(0).center;
  const Point2 o2 = s.obstacles.at(1).center;
  Point2 axis{o2.e - o1.e, o2.n - o1.n};
  const double span = std::hypot(axis.e, axis.n);
  axis = scale(axis, 1.0 / span);
  const Point2 left{-axis.n, axis.e};

  if (s.task == 3) {
    const Point2 entry = add(o1, scale(axis, -kCircleRadius));
    append_resampled(path, entry);
    const int n = 360;
    for (int i = 1; i <= n; ++i) {
      const double a = 2 * std::numbers::pi * i / n;
      // Start behind the obstacle and go round it counter-clockwise.
      const Point2 p = add(o1, add(scale(axis, -kCircleRadius * std::cos(a)),
                                   scale(left, -kCircleRadius * std::sin(a))));
      append_resampled(path, p);
    }
  } else if (s.task == 4) {
    const Point2 mid = scale(add(o1, o2), 0.5);
    const double half = span / 2 + kFigureHalfWidth;
    auto at = [&](double t) {
      return add(mid, add(scale(axis, -half * std::cos(t)), scale(left, kFigureHalfWidth * std::sin(2 * t))));
    };
    append_resampled(path, at(0));
    const int n = 720;
    for (int i = 1; i <= n; ++i) append_resampled(path, at(2 * std::numbers::pi * i / n));
  }
  append_resampled(path, s.landing);
  return path;
}

double altitude_hold(const SimState& s, double alt, const SimConfig& config) {
  const double rate = kAltGain * (alt - s.position.u) - kClimbDamping * s.velocity.u;
  return std::clamp(rate / config.max_climb_rate, -1.0, 1.0);
}

StickCommand hold_heading(StickCommand c, const SimState& s, double heading) {
  c.yaw = std::clamp(kYawGain * wrap_pi(heading - s.yaw), -1.0, 1.0);
  return c;
}

}  // namespace

const char* to_string(ScriptedPilot::Phase p) noexcept {
  switch (p) {
    case ScriptedPilot::Phase::Idle: return "idle";
    case ScriptedPilot::Phase::Arm: return "arm";
    case ScriptedPilot::Phase::Climb: return "climb";
    case ScriptedPilot::Phase::Hold: return "hold";
    case ScriptedPilot::Phase::Follow: return "follow";
    case ScriptedPilot::Phase::Settle: return "settle";
    case ScriptedPilot::Phase::Descend: return "descend";
    case ScriptedPilot::Phase::Done: return "done";
  }
  return "?";
}

ScriptedPilot::ScriptedPilot(Scenario scenario, SimConfig config)
    : scenario_(std::move(scenario)), config_(config) {
  validate(scenario_);
  path_ = build_path(scenario_);
  cruise_alt_ = scenario_.task == 1 ? scenario_.target_altitude + kHoverMargin
                                    : scenario_.target_altitude + kCruiseClearance;
  const Point2 d{scenario_.landing.e - scenario_.start.e, scenario_.landing.n - scenario_.start.n};
  if (std::hypot(d.e, d.n) > 1e-9) {
    heading_ = std::atan2(d.e, d.n);
  } else if (scenario_.obstacles.empty()) {
    heading_ = std::numbers::pi / 2;
  } else {
    const Point2 o = scenario_.obstacles.front().center;
    heading_ = std::atan2(o.e - scenario_.start.e, o.n - scenario_.start.n);
  }
}

void ScriptedPilot::enter(Phase next, const SimState& s) {
  phase_ = next;
  phase_start_ = s.t;
}

StickCommand ScriptedPilot::fly_to(const SimState& s, Point2 target, double alt, double speed) const {
  const Point2 pos{s.position.e, s.position.n};
  Point2 v{kPosGain * (target.e - pos.e), kPosGain * (target.n - pos.n)};
  const double norm = std::hypot(v.e, v.n);
  if (norm > speed) v = scale(v, speed / norm);
  const geo::Enu f = forward_axis(s.yaw);
  const geo::Enu r = right_axis(s.yaw);
  StickCommand c;
  c.pitch = (v.e * f.e + v.n * f.n) / config_.max_horizontal_speed;
  c.roll = (v.e * r.e + v.n * r.n) / config_.max_horizontal_speed;
  c.throttle = altitude_hold(s, alt, config_);
  return hold_heading(c, s, heading_).clamped();
}

StickCommand ScriptedPilot::command(const SimState& s) {
  switch (phase_) {
    case Phase::Idle:
      if (s.t - phase_start_ < kIdleSeconds) return {};
      enter(Phase::Arm, s);
      [[fallthrough]];
    case Phase::Arm:
      if (!s.armed) return {0, 0, 1, -1};
      enter(Phase::Climb, s);
      [[fallthrough]];
    case Phase::Climb: {
      const double ready = scenario_.task == 1 ? scenario_.target_altitude : cruise_alt_ - 0.1;
      if (s.position.u < ready) {
        auto c = fly_to(s, scenario_.start, cruise_alt_, kCruiseSpeed);
        return c;
      }
      enter(scenario_.task == 1 ? Phase::Hold : Phase::Follow, s);
      carrot_ = 0;
      if (phase_ == Phase::Follow) return command(s);
      [[fallthrough]];
    }
    case Phase::Hold:
      if (s.t - phase_start_ < kHoverSeconds) return fly_to(s, scenario_.start, cruise_alt_, kCruiseSpeed);
      enter(Phase::Descend, s);
      return command(s);
    case Phase::Follow: {
      const Point2 pos{s.position.e, s.position.n};
      while (carrot_ + 1 < path_.size() && dist(pos, path_[carrot_]) < kLookahead) ++carrot_;
      if (carrot_ + 1 < path_.size()) {
        // Constant cruise speed toward the carrot.
        const Point2 to = path_[carrot_];
        const double d = dist(pos, to);
        Point2 v = scale({to.e - pos.e, to.n - pos.n}, kCruiseSpeed / d);
        const geo::Enu f = forward_axis(s.yaw);
        const geo::Enu r = right_axis(s.yaw);
        StickCommand c;
        c.pitch = (v.e * f.e + v.n * f.n) / config_.max_horizontal_speed;
        c.roll = (v.e * r.e + v.n * r.n) / config_.max_horizontal_speed;
        c.throttle = altitude_hold(s, cruise_alt_, config_);
        return hold_heading(c, s, heading_).clamped();
      }
      enter(Phase::Settle, s);
      [[fallthrough]];
    }
    case Phase::Settle:
      if (dist({s.position.e, s.position.n}, scenario_.landing) > kArrive || s.ground_speed() > 0.05) {
        return fly_to(s, scenario_.landing, cruise_alt_, kCruiseSpeed);
      }
      enter(Phase::Descend, s);
      [[fallthrough]];
    case Phase::Descend: {
      if (!s.armed) {
        enter(Phase::Done, s);
        return {};
      }
      const Point2 spot = scenario_.task == 1 ? scenario_.start : scenario_.landing;
      auto c = fly_to(s, spot, 0, kCruiseSpeed);
      const double rate = s.position.u > 1.0 ? kFastDescent : kSlowDescent;
      c.throttle = -rate / config_.max_climb_rate;
      return c.clamped();
    }
    case Phase::Done:
      return {};
  }
  return {};
}

double ScriptedPilot::nominal_duration() const {
  const double tau = config_.response_tau;
  const double climb = config_.max_climb_rate;
  double total = 0;
  // Climb at full rate, then the proportional approach to the last metre.
  total += std::max(0.0, cruise_alt_ - 1.0) / climb + tau + 1.9;
  if (scenario_.task == 1) {
    total += kHoverSeconds;
  } else {
    total += path_length(path_) / kCruiseSpeed + 2 * tau;
  }
  total += std::max(0.0, cruise_alt_ - 1.0) / kFastDescent + 1.0 / kSlowDescent + tau;
  total += config_.disarm_after_s;
  return total;
}

}  // namespace fpvgl::sim
