#include "fpvgl/pipeline/pipeline.hpp"

#include <cmath>

#include "fpvgl/sim/frames.hpp"

namespace fpvgl::pipeline {

logger::FramePair SyntheticFrames::capture(const logger::TelemetrySnapshot& snapshot) {
  const std::uint32_t stamp = snapshot.time_boot_ms().value_or(0);
  return {sim::render_frame(sim::View::Front, stamp), sim::render_frame(sim::View::Bottom, stamp)};
}

SimLoggerSink::SimLoggerSink(logger::SessionWriter& writer, logger::FrameSource& frames,
                             double rate_hz, std::int64_t base_wall_ms)
    : writer_(writer),
      frames_(frames),
      interval_ms_(std::llround(1000.0 / rate_hz)),
      base_wall_ms_(base_wall_ms) {
  if (!(rate_hz > 0) || interval_ms_ < 1) throw std::invalid_argument("log rate must be in (0, 1000] Hz");
}

void SimLoggerSink::on_tick(const sim::TickOutput& out) {
  for (const auto& m : out.messages) current_.apply(m);
  const std::int64_t t_ms = std::llround(out.t * 1000);
  if (t_ms < next_ms_) return;
  const auto frames = frames_.capture(current_);
  writer_.log_iteration(current_, frames.front, frames.bottom, base_wall_ms_ + t_ms);
  while (next_ms_ <= t_ms) next_ms_ += interval_ms_;
}

relay::RelayClient::Callback TelemetryFeed::callback() {
  return [this](const relay::Envelope&, const mavlink::Message& m) { apply(m); };
}

void TelemetryFeed::apply(const mavlink::Message& message) {
  std::lock_guard lock(mutex_);
  current_.apply(message);
  cell_->store(current_);
}

SimSessionResult simulate_session(const sim::SimConfig& config, const sim::Scenario& scenario,
                                  const std::filesystem::path& root, double log_rate_hz,
                                  std::int64_t start_wall_ms, std::span<sim::TickSink* const> extra) {
  sim::ScriptedPilot pilot(scenario, config);
  return simulate_session(config, scenario, pilot, root, log_rate_hz, start_wall_ms, extra, {});
}

SimSessionResult simulate_session(const sim::SimConfig& config, const sim::Scenario& scenario, sim::Pilot& pilot,
                                  const std::filesystem::path& root, double log_rate_hz,
                                  std::int64_t start_wall_ms, std::span<sim::TickSink* const> extra,
                                  const sim::RunOptions& options) {
  SimSessionResult result;
  if (const auto* scripted = dynamic_cast<const sim::ScriptedPilot*>(&pilot)) {
    result.nominal_duration_s = scripted->nominal_duration();
  }
  auto writer = logger::SessionWriter::open(root, logger::SourceTag::Sim, start_wall_ms);
  result.session_dir = writer.dir();
  SyntheticFrames frames;
  SimLoggerSink sink(writer, frames, log_rate_hz, start_wall_ms);
  std::vector<sim::TickSink*> sinks{&sink};
  sinks.insert(sinks.end(), extra.begin(), extra.end());
  result.summary = sim::run_sim(config, sim::initial_state(scenario), pilot, sinks, options);
  result.manifest = writer.close();
  return result;
}

}  // namespace fpvgl::pipeline
