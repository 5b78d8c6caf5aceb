// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fpvgl/analysis/analysis.hpp"
#include "fpvgl/common/time.hpp"
#include "fpvgl/geodesy/geodesy.hpp"
#include "fpvgl/mavlink/codec.hpp"
#include "fpvgl/pipeline/pipeline.hpp"
#include "fpvgl/relay/client.hpp"
#include "fpvgl/relay/server.hpp"
#include "fpvgl/rl_export/episode.hpp"
#include "fpvgl/sim/dynamics.hpp"
#include "../support/mavlink_reference.hpp"
#include "../support/message_gen.hpp"
#include "../support/sim_capture.hpp"
#include "../support/temp_dir.hpp"

using namespace fpvgl;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a check; the first failing note is what gets printed first.
  void expect(bool ok, const std::string& note) {
    if (!ok) {
      pass = false;
      failures.push_back(note);
    }
  }
  std::vector<std::string> failures;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const geo::Geodetic& course_reference() {
  static const geo::Geodetic ref = geo::enu_to_geodetic({20, 0, 0}, sim::SimConfig{}.origin);
  return ref;
}

analysis::TaskMetrics analyze(const fs::path& session_dir, int task) {
  const auto session = logger::read_session(session_dir);
  const auto track = analysis::build_track(session, course_reference());
  const auto seg = analysis::extract_segment(track, task);
  return analysis::compute_metrics(track, seg, task, analysis::trail_bounds(track),
                                   logger::to_string(session.manifest.source));
}

constexpr std::int64_t kClock = 1709287200000;

// Sessions shared between criteria.
testing::TempDir& scratch() {
  static testing::TempDir dir;
  return dir;
}

void codec(Outcome& o) {
  const auto t0 = Clock::now();
  testing::MessageGen gen(2024);
  int mismatches = 0;
  for (int kind = 0; kind < 7; ++kind) {
    for (int i = 0; i < 1000; ++i) {
      const auto m = gen.message(kind);
      const auto bytes = mavlink::encode(m, static_cast<std::uint8_t>(i), 1, 1);
      const auto ev = mavlink::decode_frame(bytes);
      const auto* d = std::get_if<mavlink::DecodedFrame>(&ev);
      if (!d || !(d->message == m) || d->bytes != bytes) ++mismatches;
    }
  }
  const auto ref = testing::load_reference(FPVGL_TEST_DATA_DIR "/mavlink_reference.txt");
  int ref_bad = 0;
  for (const auto& f : ref.frames) {
    if (mavlink::encode(f.message, f.address) != f.bytes) ++ref_bad;
  }
  const double elapsed = seconds_since(t0);
  o.expect(mismatches == 0, std::to_string(mismatches) + " of 7000 round trips differ");
  o.expect(ref.frames.size() >= 50, "only " + std::to_string(ref.frames.size()) + " reference frames");
  o.expect(ref_bad == 0, std::to_string(ref_bad) + " reference frames differ");
  o.expect(elapsed < 10, "took " + fmt("%.2f s", elapsed));
  o.detail << "7 x 1000 round trips exact, " << ref.frames.size() - ref_bad << "/" << ref.frames.size()
           << " pymavlink frames byte-identical, " << fmt("%.2f s", elapsed);
}

void stream_robustness(Outcome& o) {
  std::mt19937_64 rng(77);
  testing::MessageGen gen(78);
  std::vector<std::uint8_t> stream;
  std::vector<std::vector<std::uint8_t>> intact;
  int i = 0;
  while (stream.size() < 1'000'000) {
    const auto r = rng() % 10;
    if (r < 2) {
      const auto n = rng() % 24;
      for (std::size_t k = 0; k < n; ++k) {
        stream.push_back(rng() % 8 == 0 ? mavlink::kMagicV1 : static_cast<std::uint8_t>(rng()));
      }
    }
    auto f = mavlink::encode(gen.message(i), static_cast<std::uint8_t>(i), 1, 1);
    ++i;
    if (r == 9) {
      f[rng() % f.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    } else {
      intact.push_back(f);
    }
    stream.insert(stream.end(), f.begin(), f.end());
  }

  const auto t0 = Clock::now();
  mavlink::Parser parser;
  std::vector<std::vector<std::uint8_t>> decoded;
  std::size_t pos = 0;
  while (pos < stream.size()) {
    const std::size_t n = std::min<std::size_t>(stream.size() - pos, 1 + rng() % 4096);
    for (auto& ev : parser.feed(std::span(stream).subspan(pos, n))) {
      if (auto* d = std::get_if<mavlink::DecodedFrame>(&ev)) decoded.push_back(std::move(d->bytes));
    }
    pos += n;
  }
  const double elapsed = seconds_since(t0);

  std::size_t found = 0;
  for (const auto& d : decoded) {
    if (found < intact.size() && d == intact[found]) ++found;
  }
  o.expect(found == intact.size(), std::to_string(intact.size() - found) + " intact frames lost");
  o.expect(elapsed < 5, "took " + fmt("%.2f s", elapsed));
  o.detail << stream.size() << " bytes, " << found << "/" << intact.size() << " intact frames recovered, "
           << decoded.size() - found << " spurious, " << fmt("%.2f s", elapsed);
}

void geodesy(Outcome& o) {
  const auto t0 = Clock::now();
  const auto eq = geo::geodetic_to_ecef({0, 0, 0});
  const double e1 = std::hypot(eq.x - 6378137.0, eq.y, eq.z);
  const auto pole = geo::geodetic_to_ecef({90, 0, 0});
  const double e2 = std::hypot(pole.x, pole.y, pole.z - 6378137.0 * (1 - 1 / 298.257223563));
  o.expect(e1 <= 1e-6, "equator error " + fmt("%.3g m", e1));
  o.expect(e2 <= 1e-6, "pole error " + fmt("%.3g m", e2));

  double worst = 0;
  for (int a = 0; a < 10; ++a) {
    for (int b = 0; b < 10; ++b) {
      for (int c = 0; c < 10; ++c) {
        const geo::Geodetic p{-89.9 + a * 19.97, -179.9 + b * 39.97, -400.0 + c * 1000.0};
        const auto x = geo::geodetic_to_ecef(p);
        const auto back = geo::geodetic_to_ecef(geo::ecef_to_geodetic(x));
        worst = std::max(worst, std::hypot(back.x - x.x, back.y - x.y, back.z - x.z));
      }
    }
  }
  o.expect(worst < 1e-6, "round trip error " + fmt("%.3g m", worst));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-500, 500);
  double worst_rel = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<geo::Enu> pts(40);
    for (auto& p : pts) p = {u(rng), u(rng), u(rng) * 0.1};
    const auto aligned = geo::align_to_east(pts, {u(rng), u(rng), 0});
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t k = i + 1; k < pts.size(); ++k) {
        const double d0 = std::hypot(pts[i].e - pts[k].e, pts[i].n - pts[k].n, pts[i].u - pts[k].u);
        const double d1 = std::hypot(aligned[i].e - aligned[k].e, aligned[i].n - aligned[k].n,
                                     aligned[i].u - aligned[k].u);
        worst_rel = std::max(worst_rel, std::abs(d1 - d0) / d0);
      }
    }
  }
  o.expect(worst_rel < 1e-9, "alignment distance error " + fmt("%.3g", worst_rel));
  const double elapsed = seconds_since(t0);
  o.expect(elapsed < 5, "took " + fmt("%.2f s", elapsed));
  o.detail << "axis errors " << fmt("%.2g", e1) << "/" << fmt("%.2g m", e2) << ", grid round trip "
           << fmt("%.2g m", worst) << ", alignment " << fmt("%.2g rel", worst_rel) << ", " << fmt("%.2f s", elapsed);
}

void dynamics(Outcome& o) {
  const auto t0 = Clock::now();
  sim::SimConfig c;
  sim::SimState s;
  s.position = {0, 0, 5};
  s.armed = s.airborne = true;
  const int n = static_cast<int>(std::lround(3 * c.response_tau / c.dt()));
  for (int i = 0; i < n; ++i) s = sim::step(s, {0, 1, 0, 0}, c, c.dt());
  const double ratio = s.ground_speed() / (0.95 * c.max_horizontal_speed);
  o.expect(std::abs(ratio - 1) <= 0.01, "speed at 3 tau is " + fmt("%.4f", ratio) + " x 0.95 vmax");

  sim::SimState hover;
  hover.position = {0, 0, 3};
  hover.armed = hover.airborne = true;
  auto silent = std::make_shared<Latest<StickCommand>>();
  sim::LivePilot pilot(silent);
  testing::Capture cap;
  sim::TickSink* sinks[] = {&cap};
  sim::RunOptions opts;
  opts.duration_s = 60;
  sim::run_sim(c, hover, pilot, sinks, opts);
  double drift = 0;
  for (const auto& st : cap.states) {
    drift = std::max(drift, std::hypot(st.position.e - hover.position.e, st.position.n - hover.position.n,
                                       st.position.u - hover.position.u));
  }
  o.expect(cap.states.back().t >= 60 - 1e-9, "hover run too short");
  o.expect(drift < 0.01, "hover drift " + fmt("%.3g m", drift));

  sim::SimConfig noisy;
  noisy.gps_noise_sigma = 0.5;
  noisy.seed = 99;
  const auto a = testing::fly(2, noisy);
  const auto b = testing::fly(2, noisy);
  o.expect(a.capture.bytes == b.capture.bytes, "same seed gave different telemetry");
  const double elapsed = seconds_since(t0);
  o.expect(elapsed < 10, "took " + fmt("%.2f s", elapsed));
  o.detail << "speed(3 tau) = " << fmt("%.4f", ratio) << " x 0.95 vmax, 60 s hover drift " << fmt("%.2g m", drift)
           << ", " << a.capture.bytes.size() << " telemetry bytes identical, " << fmt("%.2f s", elapsed);
}

void end_to_end(Outcome& o) {
  const auto t0 = Clock::now();
  sim::SimConfig c;
  const auto clean = pipeline::simulate_session(c, sim::default_scenario(1), scratch() / "e2e", 10, kClock);
  const auto m = analyze(clean.session_dir, 1);
  const double trail_err = m.trail_time_s - clean.nominal_duration_s;
  o.expect(*m.hover_distance_m < 0.05, "hover distance " + fmt("%.4f m", *m.hover_distance_m));
  o.expect(m.height_deviation_m < 0.05, "height deviation " + fmt("%.4f m", m.height_deviation_m));
  o.expect(std::abs(trail_err) <= 1.0, "trail time off nominal by " + fmt("%.3f s", trail_err));

  const double sigma = 0.5;
  const double oracle = sigma * std::sqrt(std::numbers::pi / 2);
  std::vector<double> hover;
  for (std::uint64_t seed : {1, 2, 3}) {
    sim::SimConfig n;
    n.gps_noise_sigma = sigma;
    n.seed = seed;
    const auto r = pipeline::simulate_session(n, sim::default_scenario(1), scratch() / "e2e_noise", 10, kClock);
    hover.push_back(*analyze(r.session_dir, 1).hover_distance_m);
  }
  double mean = 0;
  for (double h : hover) {
    mean += h / 3;
    o.expect(std::abs(h / oracle - 1) <= 0.15, "seed hover " + fmt("%.4f", h) + " vs " + fmt("%.4f", oracle));
  }
  o.expect(std::abs(mean / oracle - 1) <= 0.15, "mean hover " + fmt("%.4f", mean));
  const double elapsed = seconds_since(t0);
  o.expect(elapsed < 60, "took " + fmt("%.1f s", elapsed));
  o.detail << "sigma 0: hover " << fmt("%.4f", *m.hover_distance_m) << " m, height dev "
           << fmt("%.4f", m.height_deviation_m) << " m, trail " << fmt("%.2f", m.trail_time_s) << " s vs nominal "
           << fmt("%.2f", clean.nominal_duration_s) << " s; sigma 0.5: hover " << fmt("%.4f", hover[0]) << "/"
           << fmt("%.4f", hover[1]) << "/" << fmt("%.4f", hover[2]) << " m (mean " << fmt("%.4f", mean)
           << ", oracle " << fmt("%.4f", oracle) << "), " << fmt("%.1f s", elapsed);
}

void segment_rules(Outcome& o) {
  using analysis::TrackSample;
  int checked = 0, wrong = 0;
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> climb(0.02, 0.3), dx(-0.1, 0.5);
  for (int trial = 0; trial < 500; ++trial) {
    // Ramps with a random rate and hold, plus a random walk along x.
    const double rate = climb(rng);
    const double top = 3.0 + 3.0 * (trial % 3) / 2.0;
    analysis::LocalTrack track;
    double x = 0;
    for (int i = 0; i < 600; ++i) {
      track.samples.push_back({i * 0.1, x, 0, std::min(top, i * rate), true});
      x += dx(rng);
    }
    const auto& s = track.samples;

    std::optional<std::size_t> z0;
    for (std::size_t i = 0; i < s.size() && !z0; ++i) if (s[i].z >= 4.0) z0 = i;
    try {
      const auto seg = analysis::extract_segment(track, 1);
      std::size_t end = 0;
      for (std::size_t i = *z0; i < s.size(); ++i) if (s[i].t <= s[*z0].t + 10.0) end = i;
      wrong += !(z0 && seg.start_index == *z0 && seg.end_index == end);
    } catch (const analysis::ThresholdNeverReached&) {
      wrong += z0.has_value();
    }
    ++checked;

    std::optional<std::size_t> x0, x1;
    for (std::size_t i = 0; i < s.size() && !x0; ++i) if (s[i].x >= 2.0) x0 = i;
    for (std::size_t i = 0; x0 && i < s.size(); ++i) {
      if (i > *x0 && std::abs(s[i].x - s.back().x) >= 2.0) x1 = i;
    }
    for (int task = 2; task <= 4; ++task) {
      try {
        const auto seg = analysis::extract_segment(track, task);
        wrong += !(x0 && x1 && seg.start_index == *x0 && seg.end_index == *x1);
      } catch (const analysis::ThresholdNeverReached&) {
        wrong += x0 && x1;
      }
      ++checked;
    }
  }
  o.expect(wrong == 0, std::to_string(wrong) + " segments differ from the brute-force scan");
  o.detail << checked << " segments on ramp tracks match brute-force index scans exactly";
}

void report_parity(Outcome& o) {
  const char* first_col[] = {"", "Hovering distance to origin (m)", "Lateral deviation (m)", "Lateral deviation (m)",
                             "Lateral deviation (m)"};
  const std::regex row(R"(\| Digital twin \| \d+\.\d{4} \| \d+\.\d{4} \| \d+\.\d{4} \|)");
  std::ostringstream summary;
  for (int task = 1; task <= 4; ++task) {
    const auto r = pipeline::simulate_session(sim::SimConfig{}, sim::default_scenario(task), scratch() / "report",
                                              10, kClock + task * 1000);
    const analysis::TaskMetrics m[] = {analyze(r.session_dir, task)};
    std::istringstream lines(analysis::render_report(m));
    std::string title, header, rule, data;
    std::getline(lines, title);
    std::getline(lines, header);
    std::getline(lines, rule);
    std::getline(lines, data);
    const std::string want_title = "Task " + std::to_string(task) + ": " + analysis::task_title(task) +
                                   " flown trails information";
    const std::string want_header = std::string("| Platform used | ") + first_col[task] +
                                    " | Height deviation (m) | Trail time length (s) |";
    o.expect(title == want_title, "title: " + title);
    o.expect(header == want_header, "header: " + header);
    o.expect(rule == "|---|---|---|---|", "rule: " + rule);
    o.expect(std::regex_match(data, row), "row: " + data);
    summary << (task > 1 ? "; " : "") << "T" << task << " " << data.substr(15, data.size() - 17);
  }
  o.detail << "4 tables with the published columns (" << summary.str() << ")";
}

void relay_latency(Outcome& o) {
  relay::RelayServer server({"127.0.0.1", 0});
  std::atomic<std::size_t> got{0};
  auto client = std::make_unique<relay::RelayClient>(
      relay::Endpoint{"127.0.0.1", server.port()}, [&](const relay::Envelope&, const mavlink::Message&) { ++got; });
  auto wait_for = [&](std::size_t n) {
    const auto end = Clock::now() + std::chrono::seconds(10);
    while (got < n && Clock::now() < end) std::this_thread::sleep_for(std::chrono::milliseconds(1));
    return got >= n;
  };
  while (server.client_count() == 0) std::this_thread::sleep_for(std::chrono::milliseconds(1));

  testing::MessageGen gen(3);
  for (int i = 0; i < 2000; ++i) {
    server.publish(mavlink::encode(gen.message(i), static_cast<std::uint8_t>(i), 1, 1));
    if (i % 10 == 0) std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  o.expect(wait_for(2000), "loopback frames missing");
  const auto loop = client->latency_report();
  o.expect(loop.p95_s < 0.015, "loopback p95 " + fmt("%.4f s", loop.p95_s));
  client.reset();

  got = 0;
  client = std::make_unique<relay::RelayClient>(
      relay::Endpoint{"127.0.0.1", server.port()}, [&](const relay::Envelope&, const mavlink::Message&) { ++got; });
  while (server.client_count() == 0) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  for (int i = 0; i < 40; ++i) {
    const auto stamped = monotonic_us();
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.publish(mavlink::encode(gen.message(i), static_cast<std::uint8_t>(i), 1, 1), stamped);
  }
  o.expect(wait_for(40), "delayed frames missing");
  const auto delayed = client->latency_report();
  o.expect(std::abs(delayed.p50_s / 0.05 - 1) <= 0.2, "delayed p50 " + fmt("%.4f s", delayed.p50_s));
  o.detail << "loopback p95 " << fmt("%.5f s", loop.p95_s) << " over " << loop.count << " frames, 50 ms source delay p50 "
           << fmt("%.4f s", delayed.p50_s);
}

void logger_run(Outcome& o) {
  relay::RelayServer server({"127.0.0.1", 0});
  pipeline::SimRelaySink to_relay(server);
  sim::SimConfig c;
  const auto scenario = sim::default_scenario(1);
  sim::ScriptedPilot pilot(scenario, c);
  std::atomic<bool> stop_sim{false};
  sim::RunOptions run;
  run.realtime = true;
  run.stop = &stop_sim;

  pipeline::TelemetryFeed feed;
  relay::RelayClient client({"127.0.0.1", server.port()}, feed.callback());
  while (server.client_count() == 0) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  std::thread sim_thread([&] {
    sim::TickSink* sinks[] = {&to_relay};
    sim::run_sim(c, sim::initial_state(scenario), pilot, sinks, run);
  });

  auto writer = logger::SessionWriter::open(scratch() / "logger", logger::SourceTag::Sim, wall_ms_now());
  std::vector<logger::IterationRow> written;
  writer.on_row([&](const logger::IterationRow& r) { written.push_back(r); });
  pipeline::SyntheticFrames frames;
  logger::SessionRecorder recorder(writer, feed.cell(), frames, 10);
  std::atomic<bool> stop{false};
  const auto t0 = Clock::now();
  recorder.run(stop, 30.0);
  const double wall = seconds_since(t0);
  stop_sim = true;
  sim_thread.join();
  writer.close();

  const auto session = logger::read_session(writer.dir());
  const auto& rows = session.rows;
  const long n = static_cast<long>(rows.size());
  o.expect(std::abs(n - 300) <= 1, std::to_string(n) + " rows");
  std::size_t frame_files = 0;
  for (const auto& r : rows) {
    frame_files += fs::is_regular_file(session.dir / r.front_frame) + fs::is_regular_file(session.dir / r.bottom_frame);
  }
  std::size_t on_disk = 0;
  for (const char* v : {"front", "bottom"}) {
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(session.dir / v)) ++on_disk;
  }
  o.expect(frame_files == 2 * rows.size() && on_disk == frame_files, "frame files do not pair with rows");
  o.expect(rows == written, "read-back rows differ from the rows written");

  const logger::ArmRule arm;
  std::optional<std::size_t> armed;
  for (std::size_t i = 0; i < rows.size() && !armed; ++i) if (arm.armed(rows[i])) armed = i;
  o.expect(armed.has_value(), "never armed");
  double worst = 0;
  if (armed) {
    for (std::size_t i = *armed; i < rows.size(); ++i) {
      worst = std::max(worst, std::abs(rows[i].rel_alt_mm - (rows[i].alt_mm - rows[*armed].alt_mm)));
    }
  }
  o.expect(worst == 0, "rel_alt baseline off by " + fmt("%.3g mm", worst));
  o.detail << n << " rows in " << fmt("%.1f s", wall) << " at 10 Hz, " << frame_files
           << " frame files, read-back equal, baseline at row " << armed.value_or(0) << " (exact)";
}

void rl_export(Outcome& o) {
  o.expect(rl::normalize_pwm(1500) == 0.0, "normalize(1500)");
  o.expect(rl::normalize_pwm(2000) == 1.0, "normalize(2000)");
  o.expect(rl::normalize_pwm(1000) == -1.0, "normalize(1000)");
  const auto r = pipeline::simulate_session(sim::SimConfig{}, sim::default_scenario(2), scratch() / "rl", 10, kClock);
  const auto session = logger::read_session(r.session_dir);
  const auto dataset = rl::export_episode(session, sim::default_scenario(2));
  rl::write_dataset(dataset, scratch() / "rl/task2.json");
  const auto back = rl::read_dataset(scratch() / "rl/task2.json");
  o.expect(back == dataset, "dataset changed across write/read");
  const logger::ArmRule arm;
  std::size_t armed = 0;
  for (const auto& row : session.rows) armed += arm.armed(row);
  o.expect(dataset.steps.size() == armed, std::to_string(dataset.steps.size()) + " steps for " +
                                              std::to_string(armed) + " armed rows");
  o.detail << "normalize 1500/2000/1000 = 0/1/-1 exactly, " << dataset.steps.size() << " steps = " << armed
           << " armed rows, round trip equal";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"codec compatibility", codec},
      {"stream robustness", stream_robustness},
      {"geodesy", geodesy},
      {"simulator dynamics", dynamics},
      {"end-to-end pipeline", end_to_end},
      {"segment rules", segment_rules},
      {"report parity", report_parity},
      {"relay latency", relay_latency},
      {"logger", logger_run},
      {"rl export", rl_export},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.failures.push_back(std::string("exception: ") + e.what());
    }
    std::string line = (o.pass ? "PASS " : "FAIL ") + name + ": ";
    if (!o.pass) {
      for (const auto& f : o.failures) line += f + "; ";
    }
    line += o.detail.str();
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
