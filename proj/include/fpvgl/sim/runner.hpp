#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpvgl/mavlink/messages.hpp"
#include "fpvgl/sim/pilot.hpp"
#include "fpvgl/sim/state.hpp"

namespace fpvgl::sim {

struct TickOutput {
  double t = 0;
  std::uint64_t tick = 0;
  const SimState* state = nullptr;
  std::vector<mavlink::Message> messages;
  std::vector<std::vector<std::uint8_t>> frames;  // encoded, one per message
};

class TickSink {
 public:
  virtual ~TickSink() = default;
  virtual void on_tick(const TickOutput& out) = 0;
  virtual void on_end(const SimState&) {}
};

struct RunOptions {
  std::optional<double> duration_s;  // stop after this much sim time
  double max_duration_s = 900;
  double linger_s = 1.0;  // keep ticking after the pilot finishes
  bool realtime = false;
  const std::atomic<bool>* stop = nullptr;
};

struct SimRunSummary {
  std::uint64_t ticks = 0;
  std::uint64_t messages = 0;
  std::chrono::duration<double> wall_time{};
  SimState final_state;
  std::optional<std::string> error;  // set when a sink failed
};

SimRunSummary run_sim(const SimConfig& config, const SimState& initial, Pilot& pilot,
                      std::span<TickSink* const> sinks, const RunOptions& options = {});

// Initial state for a scenario: on the ground at the start point, facing the
// landing point.
SimState initial_state(const Scenario& scenario);

}  // namespace fpvgl::sim
