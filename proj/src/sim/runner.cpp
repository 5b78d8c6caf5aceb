#include "fpvgl/sim/runner.hpp"

#include <cmath>
#include <exception>
#include <thread>

#include "fpvgl/mavlink/codec.hpp"
#include "fpvgl/sim/dynamics.hpp"
#include "fpvgl/sim/telemetry.hpp"

namespace fpvgl::sim {

SimState initial_state(const Scenario& scenario) {
  SimState s;
  s.position = {scenario.start.e, scenario.start.n, 0};
  const double de = scenario.landing.e - scenario.start.e;
  const double dn = scenario.landing.n - scenario.start.n;
  if (std::hypot(de, dn) > 1e-9) {
    s.yaw = wrap_pi(std::atan2(de, dn));
  } else if (!scenario.obstacles.empty()) {
    const auto& o = scenario.obstacles.front().center;
    s.yaw = wrap_pi(std::atan2(o.e - scenario.start.e, o.n - scenario.start.n));
  } else {
    s.yaw = std::atan2(1.0, 0.0);
  }
  return s;
}

SimRunSummary run_sim(const SimConfig& config, const SimState& initial, Pilot& pilot,
                      std::span<TickSink* const> sinks, const RunOptions& options) {
  config.validate();
  SimRunSummary summary;
  TelemetrySynth synth(config);
  SimState state = initial;
  const double dt = config.dt();
  const auto wall_start = std::chrono::steady_clock::now();
  const auto period = std::chrono::duration<double>(dt);
  std::uint8_t seq = 0;
  double finished_at = -1;

  while (true) {
    if (options.stop && options.stop->load()) break;
    if (options.duration_s && state.t >= *options.duration_s - 1e-9) break;
    if (state.t >= options.max_duration_s - 1e-9) break;
    if (pilot.finished()) {
      if (finished_at < 0) finished_at = state.t;
      if (state.t - finished_at >= options.linger_s - 1e-9) break;
    }

    const StickCommand cmd = pilot.command(state);
    state = step(state, cmd, config, dt);

    TickOutput out;
    out.t = state.t;
    out.tick = state.tick;
    out.state = &state;
    out.messages = synth.tick(state);
    out.frames.reserve(out.messages.size());
    for (const auto& m : out.messages) out.frames.push_back(mavlink::encode(m, seq++, 1, 1));

    try {
      for (TickSink* sink : sinks) sink->on_tick(out);
    } catch (const std::exception& e) {
      summary.error = e.what();
    }
    ++summary.ticks;
    summary.messages += out.messages.size();
    if (summary.error) break;

    if (options.realtime) {
      std::this_thread::sleep_until(
          wall_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                           period * static_cast<double>(summary.ticks)));
    }
  }

  for (TickSink* sink : sinks) {
    try {
      sink->on_end(state);
    } catch (const std::exception& e) {
      if (!summary.error) summary.error = e.what();
    }
  }
  summary.final_state = state;
  summary.wall_time = std::chrono::steady_clock::now() - wall_start;
  return summary;
}

}  // namespace fpvgl::sim
