#include "fpvgl/cli/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "fpvgl/analysis/analysis.hpp"
#include "fpvgl/bridge/bridge.hpp"
#include "fpvgl/common/time.hpp"
#include "fpvgl/pipeline/pipeline.hpp"
#include "fpvgl/relay/service.hpp"
#include "fpvgl/rl_export/episode.hpp"

namespace fpvgl::cli {

namespace fs = std::filesystem;
using namespace std::chrono_literals;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  bool verbose = false;
  std::uint64_t seed = 0;
};

fs::path default_root() {
  const char* env = std::getenv("FPVGL_ROOT");
  return env && *env ? fs::path(env) : fs::path("sessions");
}

const CLI::Validator kEndpoint(
    [](std::string& text) {
      try {
        relay::Endpoint::parse(text);
      } catch (const std::exception& e) {
        return std::string(e.what());
      }
      return std::string();
    },
    "HOST:PORT");

// Blocks until interrupted or `duration_s` has passed (forever when <= 0).
void wait_running(double duration_s, const std::function<bool()>& done = {}) {
  const auto end = std::chrono::steady_clock::now() + std::chrono::duration<double>(duration_s);
  while (!interrupt_flag()) {
    if (duration_s > 0 && std::chrono::steady_clock::now() >= end) return;
    if (done && done()) return;
    std::this_thread::sleep_for(20ms);
  }
}

struct SimArgs {
  int task = 0;
  std::string scenario_file;
  std::string pilot = "scripted";
  double gps_noise = 0;
  std::string listen;
  fs::path out;
  double log_rate = 10;
  bool no_log = false;
  bool realtime = false;
  double duration = 0;
  std::optional<std::int64_t> clock_start;
};

int run_sim_command(const SimArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  sim::Scenario scenario;
  if (!a.scenario_file.empty()) {
    try {
      scenario = sim::load_scenario(a.scenario_file);
    } catch (const sim::ScenarioError& e) {
      throw UsageError(e.what());
    }
    if (a.task != 0 && a.task != scenario.task) throw UsageError("--task disagrees with the scenario file");
  } else if (a.task != 0) {
    scenario = sim::default_scenario(a.task);
  } else {
    throw UsageError("sim needs --task or --scenario");
  }
  if (a.pilot == "live" && a.listen.empty()) throw UsageError("--pilot live needs --listen for stick input");
  if (a.no_log && a.listen.empty()) throw UsageError("--no-log without --listen would produce nothing");

  sim::SimConfig config;
  config.gps_noise_sigma = a.gps_noise;
  config.seed = g.seed;
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  auto cell = std::make_shared<Latest<StickCommand>>();
  std::unique_ptr<sim::Pilot> pilot;
  if (a.pilot == "live") {
    pilot = std::make_unique<sim::LivePilot>(cell);
  } else {
    pilot = std::make_unique<sim::ScriptedPilot>(scenario, config);
  }

  std::unique_ptr<relay::RelayServer> server;
  std::unique_ptr<pipeline::SimRelaySink> relay_sink;
  std::vector<sim::TickSink*> extra;
  if (!a.listen.empty()) {
    server = std::make_unique<relay::RelayServer>(relay::Endpoint::parse(a.listen), relay::RelayOptions::from_env());
    server->on_stick([cell](const StickCommand& c) { cell->store(c); });
    relay_sink = std::make_unique<pipeline::SimRelaySink>(*server);
    extra.push_back(relay_sink.get());
    out << "relay: " << relay::Endpoint{"127.0.0.1", server->port()}.str() << std::endl;
  }

  sim::RunOptions options;
  options.realtime = a.realtime || !a.listen.empty();
  options.stop = &interrupt_flag();
  if (a.duration > 0) options.duration_s = a.duration;
  if (a.pilot == "live") options.max_duration_s = 24 * 3600.0;
  if (g.verbose) {
    err << scenario.name() << ", pilot " << a.pilot << ", seed " << g.seed << ", gps noise " << a.gps_noise
        << (options.realtime ? ", real time" : "") << "\n";
  }

  sim::SimRunSummary summary;
  if (a.no_log) {
    summary = sim::run_sim(config, sim::initial_state(scenario), *pilot, extra, options);
  } else {
    const std::int64_t start = a.clock_start.value_or(wall_ms_now());
    const auto r = pipeline::simulate_session(config, scenario, *pilot, a.out, a.log_rate, start, extra, options);
    summary = r.summary;
    out << "session: " << r.session_dir.string() << "\n";
    out << "rows: " << r.manifest.row_count << "\n";
    if (r.nominal_duration_s > 0) out << "nominal_duration_s: " << r.nominal_duration_s << "\n";
  }
  out << "ticks: " << summary.ticks << "\n";
  out << "messages: " << summary.messages << "\n";
  out << "sim_time_s: " << summary.final_state.t << "\n";
  if (server) server->stop();
  if (summary.error) throw std::runtime_error(*summary.error);
  return 0;
}

struct RelayArgs {
  std::string source;
  std::string listen = "127.0.0.1:5760";
  double duration = 0;
};

int run_relay_command(const RelayArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  const auto listen = relay::Endpoint::parse(a.listen);
  auto service = relay::serve(relay::open_source(a.source), listen);
  out << "relay: " << relay::Endpoint{listen.host, service->server().port()}.str() << std::endl;
  wait_running(a.duration, [&] { return service->source_ended(); });
  service->stop();
  if (g.verbose) err << "source " << (service->source_ended() ? "ended" : "open") << "\n";
  out << "ingested: " << service->ingested() << "\n";
  out << "rejected: " << service->rejected() << "\n";
  out << "dropped_clients: " << service->server().dropped_clients() << "\n";
  return 0;
}

struct LogArgs {
  std::string from;
  fs::path out;
  double rate = 10;
  double duration = 0;
  std::string source = "physical";
};

int run_log_command(const LogArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  const auto tag = logger::parse_source_tag(a.source);
  pipeline::TelemetryFeed feed;
  relay::RelayClient client(relay::Endpoint::parse(a.from), feed.callback());
  auto writer = logger::SessionWriter::open(a.out, tag, wall_ms_now());
  out << "session: " << writer.dir().string() << std::endl;
  pipeline::SyntheticFrames frames;
  logger::SessionRecorder recorder(writer, feed.cell(), frames, a.rate);

  std::atomic<bool> stop{false};
  std::thread watcher([&] {
    while (!stop) {
      if (interrupt_flag() || !client.connected()) stop = true;
      std::this_thread::sleep_for(20ms);
    }
  });
  const auto rows = recorder.run(stop, a.duration > 0 ? std::optional<double>(a.duration) : std::nullopt);
  stop = true;
  watcher.join();
  const auto latency = client.latency_report();
  client.close();
  const auto manifest = writer.close();
  if (g.verbose) err << "relay messages " << client.received() << ", rows this run " << rows << "\n";
  out << "rows: " << manifest.row_count << "\n";
  out << "messages: " << client.received() << "\n";
  if (latency.count > 0) {
    out << "latency_p50_s: " << latency.p50_s << "\n";
    out << "latency_max_s: " << latency.max_s << "\n";
  }
  return 0;
}

struct AnalyzeArgs {
  std::vector<std::string> sessions;
  int task = 0;
  double ref_lat = 0;
  double ref_lon = 0;
  double ref_alt = 0;
  std::string alt_mode = "relative";
  std::string origin = "ground-mean";
  fs::path out;
};

int run_analyze_command(const AnalyzeArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  analysis::TrackOptions options;
  try {
    options.altitude = analysis::parse_altitude_mode(a.alt_mode);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  options.origin = a.origin == "first-fix" ? analysis::OriginRule::FirstFix : analysis::OriginRule::GroundMean;

  std::vector<logger::FlightSession> sessions;
  for (const auto& dir : a.sessions) sessions.push_back(logger::read_session(dir));

  std::vector<analysis::TaskMetrics> metrics;
  nlohmann::ordered_json json = nlohmann::ordered_json::array();
  for (const auto& s : sessions) {
    const auto track = analysis::build_track(s, {a.ref_lat, a.ref_lon, a.ref_alt}, options);
    const auto segment = analysis::extract_segment(track, a.task);
    const auto m = analysis::compute_metrics(track, segment, a.task, analysis::trail_bounds(track),
                                             logger::to_string(s.manifest.source));
    metrics.push_back(m);
    if (g.verbose) {
      err << s.manifest.session_id << ": " << track.samples.size() << " samples, segment [" << segment.start_index
          << ", " << segment.end_index << "] by " << segment.rule << "\n";
    }
    nlohmann::ordered_json j;
    j["session"] = s.manifest.session_id;
    j["platform"] = m.platform_tag;
    j["task"] = m.task;
    j["hover_distance_m"] = m.hover_distance_m ? nlohmann::ordered_json(*m.hover_distance_m) : nullptr;
    j["lateral_deviation_m"] = m.lateral_deviation_m ? nlohmann::ordered_json(*m.lateral_deviation_m) : nullptr;
    j["height_deviation_m"] = m.height_deviation_m;
    j["trail_time_s"] = m.trail_time_s;
    j["segment_samples"] = m.segment_samples;
    j["segment_rule"] = segment.rule;
    json.push_back(j);
    if (!a.out.empty()) analysis::write_series(track, a.out / s.manifest.session_id);
  }
  const std::string report = analysis::render_report(metrics);
  out << report;
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    std::ofstream(a.out / "report.md") << report;
    std::ofstream(a.out / "metrics.json") << json.dump(1) << "\n";
  }
  return 0;
}

struct ExportArgs {
  std::string session;
  std::string scenario;
  fs::path out;
  std::string channels = "roll=1,pitch=2,throttle=3,yaw=4";
};

int run_export_command(const ExportArgs& a, const Globals&, std::ostream& out, std::ostream&) {
  rl::ChannelMap map;
  sim::Scenario scenario;
  try {
    map = rl::parse_channel_map(a.channels);
    scenario = sim::load_scenario(a.scenario);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const sim::ScenarioError& e) {
    throw UsageError(e.what());
  }
  const auto session = logger::read_session(a.session);
  const auto dataset = rl::export_episode(session, scenario, map);
  rl::write_dataset(dataset, a.out);
  out << "dataset: " << a.out.string() << "\n";
  out << "steps: " << dataset.steps.size() << "\n";
  return 0;
}

struct BridgeArgs {
  std::string relay = "127.0.0.1:5760";
  std::string listen = "127.0.0.1:8765";
  double frame_rate = 5;
  bool no_frames = false;
  double duration = 0;
};

int run_bridge_command(const BridgeArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  pipeline::SyntheticFrames frames;
  bridge::BridgeOptions o;
  o.relay = relay::Endpoint::parse(a.relay);
  o.listen = relay::Endpoint::parse(a.listen);
  o.frame_rate_hz = a.frame_rate;
  o.frames = a.no_frames ? nullptr : &frames;
  bridge::Bridge b(o);
  out << "bridge: ws://" << o.listen.host << ":" << b.port() << "/" << std::endl;
  bool was_connected = false;
  wait_running(a.duration, [&] {
    if (g.verbose && b.relay_connected() != was_connected) {
      was_connected = b.relay_connected();
      err << "relay " << (was_connected ? "connected" : "disconnected") << "\n";
    }
    return false;
  });
  b.stop();
  out << "states: " << b.states_sent() << "\n";
  out << "frames: " << b.frames_sent() << "\n";
  out << "sticks: " << b.sticks_forwarded() << "\n";
  return 0;
}

}  // namespace

std::atomic<bool>& interrupt_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Flight data tools: simulate, relay, log, analyze, export, bridge", "fpvgl"};
  app.fallthrough();
  Globals g;
  app.add_flag("-v,--verbose", g.verbose, "Progress detail on stderr");
  app.add_option("--seed", g.seed, "Seed for every random element");

  SimArgs sim_args;
  sim_args.out = default_root();
  auto* sim = app.add_subcommand("sim", "Run the simulator, logging a session and optionally serving telemetry");
  sim->add_option("--task", sim_args.task, "Task 1-4 with the default course")->check(CLI::Range(1, 4));
  sim->add_option("--scenario", sim_args.scenario_file, "Scenario file")->check(CLI::ExistingFile);
  sim->add_option("--pilot", sim_args.pilot, "scripted or live")
      ->check(CLI::IsMember({"scripted", "live"}))
      ->capture_default_str();
  sim->add_option("--gps-noise", sim_args.gps_noise, "GPS noise sigma, m")->check(CLI::NonNegativeNumber);
  sim->add_option("--listen", sim_args.listen, "Serve telemetry as a relay at HOST:PORT")->check(kEndpoint);
  sim->add_option("--out", sim_args.out, "Session root (FPVGL_ROOT)")->capture_default_str();
  sim->add_option("--log-rate", sim_args.log_rate, "Logged rows per simulated second")
      ->check(CLI::Range(0.1, 1000.0))
      ->capture_default_str();
  sim->add_flag("--no-log", sim_args.no_log, "Serve only, do not log a session");
  sim->add_flag("--realtime", sim_args.realtime, "Pace to the wall clock (implied by --listen)");
  sim->add_option("--duration", sim_args.duration, "Stop after this many simulated seconds")
      ->check(CLI::PositiveNumber);
  sim->add_option("--clock-start", sim_args.clock_start, "Session clock origin, Unix ms (default now)");

  RelayArgs relay_args;
  auto* relay = app.add_subcommand("relay", "Relay MAVLink from a device, TCP port or relay to TCP clients");
  relay->add_option("--source", relay_args.source, "Device path, tcp:HOST:PORT or relay:HOST:PORT")->required();
  relay->add_option("--listen", relay_args.listen, "HOST:PORT")->check(kEndpoint)->capture_default_str();
  relay->add_option("--duration", relay_args.duration, "Stop after this many seconds")->check(CLI::PositiveNumber);

  LogArgs log_args;
  log_args.out = default_root();
  auto* log = app.add_subcommand("log", "Log a relay feed into a session directory");
  log->add_option("--from", log_args.from, "Relay HOST:PORT")->required()->check(kEndpoint);
  log->add_option("--out", log_args.out, "Session root (FPVGL_ROOT)")->capture_default_str();
  log->add_option("--rate", log_args.rate, "Rows per second")->check(CLI::Range(0.1, 1000.0))->capture_default_str();
  log->add_option("--duration", log_args.duration, "Stop after this many seconds")->check(CLI::PositiveNumber);
  log->add_option("--source-tag", log_args.source, "physical or sim")
      ->check(CLI::IsMember({"physical", "sim"}))
      ->capture_default_str();

  AnalyzeArgs an_args;
  auto* analyze = app.add_subcommand("analyze", "Segment a session and compute task metrics");
  analyze->add_option("--session", an_args.sessions, "Session directory (repeat to compare platforms)")
      ->required()
      ->check(CLI::ExistingDirectory);
  analyze->add_option("--task", an_args.task, "Task 1-4")->required()->check(CLI::Range(1, 4));
  analyze->add_option("--ref-lat", an_args.ref_lat, "Course reference latitude, deg")
      ->required()
      ->check(CLI::Range(-90.0, 90.0));
  analyze->add_option("--ref-lon", an_args.ref_lon, "Course reference longitude, deg")
      ->required()
      ->check(CLI::Range(-180.0, 180.0));
  analyze->add_option("--ref-alt", an_args.ref_alt, "Reference altitude, m");
  analyze->add_option("--alt-mode", an_args.alt_mode, "relative or gps")
      ->check(CLI::IsMember({"relative", "gps"}))
      ->capture_default_str();
  analyze->add_option("--origin", an_args.origin, "ground-mean or first-fix")
      ->check(CLI::IsMember({"ground-mean", "first-fix"}))
      ->capture_default_str();
  analyze->add_option("--out", an_args.out, "Directory for series files, report.md and metrics.json");

  ExportArgs ex_args;
  auto* exp = app.add_subcommand("export", "Export a session as an imitation learning episode");
  exp->add_option("--session", ex_args.session, "Session directory")->required()->check(CLI::ExistingDirectory);
  exp->add_option("--scenario", ex_args.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  exp->add_option("--out", ex_args.out, "Dataset file")->required();
  exp->add_option("--channels", ex_args.channels, "RC channel per axis")->capture_default_str();

  BridgeArgs br_args;
  auto* br = app.add_subcommand("bridge", "Translate relay telemetry for the browser console");
  br->add_option("--relay", br_args.relay, "Relay HOST:PORT")->check(kEndpoint)->capture_default_str();
  br->add_option("--listen", br_args.listen, "WebSocket HOST:PORT")->check(kEndpoint)->capture_default_str();
  br->add_option("--frame-rate", br_args.frame_rate, "Frame messages per second")
      ->check(CLI::Range(0.1, 60.0))
      ->capture_default_str();
  br->add_flag("--no-frames", br_args.no_frames, "Send telemetry only");
  br->add_option("--duration", br_args.duration, "Stop after this many seconds")->check(CLI::PositiveNumber);

  app.require_subcommand(1);

  if (args.empty()) {
    out << app.help();
    return 2;
  }
  interrupt_flag() = false;
  if (!args[0].starts_with("-") && !app.get_subcommand_no_throw(args[0])) {
    err << "error: unknown subcommand '" << args[0] << "'\n";
    return 2;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*sim) return run_sim_command(sim_args, g, out, err);
    if (*relay) return run_relay_command(relay_args, g, out, err);
    if (*log) return run_log_command(log_args, g, out, err);
    if (*analyze) return run_analyze_command(an_args, g, out, err);
    if (*exp) return run_export_command(ex_args, g, out, err);
    if (*br) return run_bridge_command(br_args, g, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace fpvgl::cli
