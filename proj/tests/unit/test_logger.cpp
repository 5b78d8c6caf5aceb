#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fpvgl/common/time.hpp"
#include "fpvgl/logger/recorder.hpp"
#include "fpvgl/logger/session.hpp"
#include "fpvgl/pipeline/pipeline.hpp"
#include "fpvgl/sim/frames.hpp"
#include "../support/temp_dir.hpp"

using namespace fpvgl;
using namespace fpvgl::logger;
namespace fs = std::filesystem;
using fpvgl::testing::TempDir;

namespace {

constexpr std::int64_t kMarch1 = 1709287200000;  // 2024-03-01T10:00:00Z

const std::vector<std::uint8_t> kFront{1, 2, 3};
const std::vector<std::uint8_t> kBottom{4, 5, 6, 7};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

TelemetrySnapshot snapshot_at(std::int32_t alt_mm, bool armed, std::uint32_t boot_ms = 0) {
  TelemetrySnapshot s;
  mavlink::GlobalPositionInt g;
  g.time_boot_ms = boot_ms;
  g.lat = 430009000;
  g.lon = -787873000;
  g.alt = alt_mm;
  s.apply(g);
  mavlink::ServoOutputRaw servo;
  for (int i = 0; i < 4; ++i) servo.servo[i] = armed ? 1300 : 1000;
  s.apply(servo);
  return s;
}

std::size_t count_dir(const fs::path& p) {
  return static_cast<std::size_t>(std::distance(fs::directory_iterator(p), fs::directory_iterator()));
}

}  // namespace

TEST_CASE("session directories are named by UTC open time") {
  TempDir tmp;
  auto a = SessionWriter::open(tmp.path(), SourceTag::Sim, kMarch1);
  CHECK(a.dir() == tmp / "20240301-100000");
  CHECK(fs::is_regular_file(a.dir() / "flight.csv"));
  CHECK(fs::is_directory(a.dir() / "front"));
  CHECK(fs::is_directory(a.dir() / "bottom"));
  auto b = SessionWriter::open(tmp.path(), SourceTag::Sim, kMarch1 + 999);
  CHECK(b.dir() == tmp / "20240301-100000-1");
  auto c = SessionWriter::open(tmp.path(), SourceTag::Sim, kMarch1);
  CHECK(c.dir() == tmp / "20240301-100000-2");
}

TEST_CASE("unwritable root leaves nothing behind") {
  TempDir tmp;
  spit(tmp / "blocker", "x");
  CHECK_THROWS_AS(SessionWriter::open(tmp / "blocker" / "sessions", SourceTag::Sim, kMarch1), LoggerError);
  CHECK(count_dir(tmp.path()) == 1);
}

TEST_CASE("csv header lists the row fields in order") {
  TempDir tmp;
  auto w = SessionWriter::open(tmp.path(), SourceTag::Physical, kMarch1);
  const std::string header = slurp(w.dir() / "flight.csv");
  CHECK(header ==
        "wall_timestamp,time_boot_ms,lat_1e7,lon_1e7,alt_mm,rel_alt_mm,vx_cms,vy_cms,vz_cms,hdg_cdeg,"
        "groundspeed_ms,climb_ms,roll_rad,pitch_rad,yaw_rad,rc1_us,rc2_us,rc3_us,rc4_us,rc5_us,rc6_us,"
        "rc7_us,rc8_us,servo1_us,servo2_us,servo3_us,servo4_us,servo5_us,servo6_us,servo7_us,servo8_us,"
        "front_frame,bottom_frame\n");
}

TEST_CASE("first row with partial telemetry") {
  TempDir tmp;
  auto w = SessionWriter::open(tmp.path(), SourceTag::Sim, kMarch1);
  TelemetrySnapshot s;
  mavlink::GlobalPositionInt g;
  g.time_boot_ms = 1234;
  g.lat = 430009000;
  g.lon = -787873000;
  g.alt = 200000;
  g.vx = -12;
  g.hdg = 9000;
  s.apply(g);
  mavlink::Attitude a;
  a.time_boot_ms = 1240;
  a.roll = 0.125f;
  s.apply(a);
  CHECK(w.log_iteration(s, kFront, kBottom, kMarch1 + 5) == 0);
  CHECK(fs::is_regular_file(w.dir() / "front/000000_1709287200005.png"));
  CHECK(fs::is_regular_file(w.dir() / "bottom/000000_1709287200005.png"));
  CHECK(slurp(w.dir() / "bottom/000000_1709287200005.png").size() == 4);
  w.close();

  const auto session = read_session(w.dir());
  REQUIRE(session.rows.size() == 1);
  const auto& r = session.rows[0];
  CHECK(r.wall_ms == kMarch1 + 5);
  CHECK(r.time_boot_ms == 1240);
  CHECK(r.lat_1e7 == 430009000);
  CHECK(r.vx_cms == -12);
  CHECK(r.hdg_cdeg == 9000);
  CHECK(r.roll_rad == 0.125);
  CHECK(r.rel_alt_mm == 0);
  CHECK(std::isnan(r.groundspeed_ms));
  CHECK(std::isnan(r.climb_ms));
  CHECK(std::isnan(r.rc_us[0]));
  CHECK(std::isnan(r.servo_us[7]));
  CHECK(r.front_frame == "front/000000_1709287200005.png");

  const std::string csv = slurp(w.dir() / "flight.csv");
  CHECK(csv.find("2024-03-01T10:00:00.005Z,1240,430009000,-787873000,200000,0,-12,0,0,9000,nan,nan,0.125,0,0,nan") !=
        std::string::npos);
}

TEST_CASE("gps_raw fills position when no global position arrived") {
  TelemetrySnapshot s;
  mavlink::GpsRawInt raw;
  raw.lat = 10;
  raw.lon = 20;
  raw.alt = 30;
  s.apply(raw);
  const auto r = row_from_snapshot(s);
  CHECK(r.lat_1e7 == 10);
  CHECK(r.alt_mm == 30);
  CHECK(std::isnan(r.vx_cms));
  CHECK(std::isnan(r.time_boot_ms));
}

TEST_CASE("hundred rows round trip with matching manifest") {
  TempDir tmp;
  auto w = SessionWriter::open(tmp.path(), SourceTag::Sim, kMarch1);
  std::vector<IterationRow> expected;
  for (int i = 0; i < 100; ++i) {
    auto s = snapshot_at(200000 + 10 * i, i >= 30, static_cast<std::uint32_t>(i * 100));
    mavlink::VfrHud hud;
    hud.groundspeed = 0.1f * static_cast<float>(i);
    hud.climb = -0.3f;
    s.apply(hud);
    w.log_iteration(s, kFront, kBottom, kMarch1 + 100 * i);
  }
  const auto m = w.close();
  CHECK(m.row_count == 100);
  CHECK(m.front_frame_count == 100);
  CHECK(m.bottom_frame_count == 100);
  CHECK(m.session_id == "20240301-100000");
  CHECK(m.start_wall_ms == kMarch1);
  CHECK(m.end_wall_ms == kMarch1 + 9900);
  CHECK(count_dir(w.dir() / "front") == 100);
  CHECK(count_dir(w.dir() / "bottom") == 100);

  const auto a = read_session(w.dir());
  CHECK(a.manifest == m);
  REQUIRE(a.rows.size() == 100);
  CHECK(a.rows[57].groundspeed_ms == static_cast<double>(0.1f * 57.0f));

  // Rows written from parsed rows format identically.
  std::string rewritten;
  for (const auto& r : a.rows) rewritten += format_csv_row(r) + "\n";
  const std::string original = slurp(w.dir() / "flight.csv");
  CHECK(original.substr(original.find('\n') + 1) == rewritten);
  for (const auto& r : a.rows) CHECK(parse_csv_row(format_csv_row(r)) == r);
}

TEST_CASE("relative altitude is measured from the first armed row") {
  TempDir tmp;
  auto w = SessionWriter::open(tmp.path(), SourceTag::Sim, kMarch1);
  const std::int32_t alts[] = {200000, 200100, 200050, 201000, 204000, 200400};
  const bool armed[] = {false, false, true, true, true, false};
  for (int i = 0; i < 6; ++i) w.log_iteration(snapshot_at(alts[i], armed[i]), kFront, kBottom, kMarch1 + i);
  w.close();
  const auto s = read_session(w.dir());
  CHECK(s.rows[0].rel_alt_mm == 0);
  CHECK(s.rows[1].rel_alt_mm == 100);
  CHECK(s.rows[2].rel_alt_mm == 0);
  CHECK(s.rows[3].rel_alt_mm == 950);
  CHECK(s.rows[4].rel_alt_mm == 3950);
  CHECK(s.rows[5].rel_alt_mm == 350);
}

TEST_CASE("bad iterations change nothing") {
  TempDir tmp;
  auto w = SessionWriter::open(tmp.path(), SourceTag::Sim, kMarch1);
  w.log_iteration(snapshot_at(1, false), kFront, kBottom, kMarch1);
  const std::string before = slurp(w.dir() / "flight.csv");

  CHECK_THROWS_AS(w.log_iteration({}, {}, kBottom, kMarch1 + 1), std::invalid_argument);
  CHECK_THROWS_AS(w.log_iteration({}, kFront, {}, kMarch1 + 1), std::invalid_argument);
  CHECK_THROWS_AS(w.log_iteration({}, kFront, kBottom, kMarch1), std::invalid_argument);
  CHECK(w.row_count() == 1);

  // A failing frame write rolls back the whole row.
  fs::rename(w.dir() / "bottom", w.dir() / "bottom.saved");
  spit(w.dir() / "bottom", "not a directory");
  CHECK_THROWS_AS(w.log_iteration({}, kFront, kBottom, kMarch1 + 1), LoggerError);
  CHECK(w.row_count() == 1);
  CHECK(count_dir(w.dir() / "front") == 1);
  CHECK(slurp(w.dir() / "flight.csv") == before);

  fs::remove(w.dir() / "bottom");
  fs::rename(w.dir() / "bottom.saved", w.dir() / "bottom");
  CHECK(w.log_iteration({}, kFront, kBottom, kMarch1 + 2) == 1);
  const auto m = w.close();
  CHECK(m.row_count == 2);
  CHECK(m.front_frame_count == 2);
  CHECK(read_session(w.dir()).rows.size() == 2);
}

TEST_CASE("closed sessions refuse rows") {
  TempDir tmp;
  auto w = SessionWriter::open(tmp.path(), SourceTag::Sim, kMarch1);
  w.close();
  CHECK_THROWS_AS(w.log_iteration({}, kFront, kBottom, kMarch1), LoggerError);
  const auto s = read_session(w.dir());
  CHECK(s.rows.empty());
}

TEST_CASE("read_session validation") {
  TempDir tmp;
  auto w = SessionWriter::open(tmp.path(), SourceTag::Sim, kMarch1);
  for (int i = 0; i < 5; ++i) w.log_iteration(snapshot_at(i, false), kFront, kBottom, kMarch1 + 100 * i);
  w.close();
  const fs::path dir = w.dir();
  const std::string csv = slurp(dir / "flight.csv");
  std::vector<std::string> lines;
  std::stringstream ss(csv);
  for (std::string l; std::getline(ss, l);) lines.push_back(l);
  auto join = [](const std::vector<std::string>& ls) {
    std::string out;
    for (const auto& l : ls) out += l + "\n";
    return out;
  };

  SUBCASE("shuffled timestamps") {
    auto shuffled = lines;
    std::swap(shuffled[3], shuffled[4]);  // rows 2 and 3
    spit(dir / "flight.csv", join(shuffled));
    CHECK_THROWS_WITH_AS(read_session(dir), "row 3: wall timestamp not increasing", LoggerError);
  }
  SUBCASE("malformed row") {
    auto broken = lines;
    broken[2].replace(broken[2].find(",430009000,"), 11, ",43x,");
    spit(dir / "flight.csv", join(broken));
    CHECK_THROWS_WITH_AS(read_session(dir), doctest::Contains("row 1: bad value '43x' in column lat_1e7"),
                         LoggerError);
  }
  SUBCASE("missing field") {
    auto broken = lines;
    broken[5] = broken[5].substr(0, broken[5].rfind(','));
    spit(dir / "flight.csv", join(broken));
    CHECK_THROWS_WITH_AS(read_session(dir), doctest::Contains("row 4: expected 33 fields"), LoggerError);
  }
  SUBCASE("dropped row") {
    auto fewer = lines;
    fewer.pop_back();
    spit(dir / "flight.csv", join(fewer));
    CHECK_THROWS_WITH_AS(read_session(dir), doctest::Contains("manifest: counts disagree"), LoggerError);
  }
  SUBCASE("missing frame") {
    fs::remove(dir / frame_name("bottom", 2, kMarch1 + 200));
    CHECK_THROWS_WITH_AS(read_session(dir), doctest::Contains("row 2: missing frame bottom/000002_"),
                         LoggerError);
  }
  SUBCASE("missing manifest") {
    fs::remove(dir / "manifest.json");
    CHECK_THROWS_AS(read_session(dir), LoggerError);
  }
}

TEST_CASE("timestamps are UTC with milliseconds") {
  CHECK(format_iso8601_ms(kMarch1 + 7) == "2024-03-01T10:00:00.007Z");
  CHECK(parse_iso8601_ms("2024-03-01T10:00:00.007Z") == kMarch1 + 7);
  CHECK(format_iso8601_ms(0) == "1970-01-01T00:00:00.000Z");
  CHECK(format_session_stamp(kMarch1) == "20240301-100000");
  CHECK_THROWS(parse_iso8601_ms("2024-03-01 10:00:00.007Z"));
  CHECK_THROWS(parse_iso8601_ms("2024-03-01T10:00:00Z"));
}

TEST_CASE("recorder samples the latest value on a real clock") {
  TempDir tmp;
  auto w = SessionWriter::open(tmp.path(), SourceTag::Sim, kMarch1);
  Latest<TelemetrySnapshot> cell;
  cell.store(snapshot_at(5000, true, 777));
  pipeline::SyntheticFrames frames;
  SessionRecorder rec(w, cell, frames, 20);
  std::atomic<bool> stop{false};
  const auto n = rec.run(stop, 1.0);
  CHECK(n == 20);
  w.close();
  const auto s = read_session(w.dir());
  CHECK(s.rows.size() == 20);
  for (std::size_t i = 1; i < s.rows.size(); ++i) {
    const auto gap = s.rows[i].wall_ms - s.rows[i - 1].wall_ms;
    CHECK(gap >= 30);
    CHECK(gap <= 70);
  }
  const auto png = slurp(s.dir / s.rows[3].front_frame);
  CHECK(sim::read_frame_stamp(std::span(reinterpret_cast<const std::uint8_t*>(png.data()), png.size())) == 777);
}

TEST_CASE("recorder stops on request") {
  TempDir tmp;
  auto w = SessionWriter::open(tmp.path(), SourceTag::Sim, kMarch1);
  Latest<TelemetrySnapshot> cell;
  pipeline::SyntheticFrames frames;
  SessionRecorder rec(w, cell, frames, 10);
  std::atomic<bool> stop{true};
  CHECK(rec.run(stop) == 0);
  CHECK_THROWS_AS(SessionRecorder(w, cell, frames, 0), std::invalid_argument);
}

TEST_CASE("simulated task 2 session has the logger cadence") {
  TempDir tmp;
  sim::SimConfig config;
  const auto scenario = sim::default_scenario(2);
  sim::ScriptedPilot pilot(scenario, config);
  auto w = SessionWriter::open(tmp.path(), SourceTag::Sim, kMarch1);
  pipeline::SyntheticFrames frames;
  pipeline::SimLoggerSink sink(w, frames, 10, kMarch1);
  sim::TickSink* sinks[] = {&sink};
  const auto sum = sim::run_sim(config, sim::initial_state(scenario), pilot, sinks);
  REQUIRE_FALSE(sum.error);
  w.close();

  const auto s = read_session(w.dir());
  const double seconds = sum.final_state.t;
  CHECK(std::abs(static_cast<double>(s.rows.size()) - seconds * 10) <= 1.0);
  // Every frame pair carries the telemetry time of its own row.
  for (std::size_t i = 0; i < s.rows.size(); i += 37) {
    const auto png = slurp(s.dir / s.rows[i].bottom_frame);
    const auto stamp = sim::read_frame_stamp(std::span(reinterpret_cast<const std::uint8_t*>(png.data()), png.size()));
    CHECK(stamp == s.rows[i].time_boot_ms);
  }
  // Before arming the servos idle; the baseline is the ground altitude.
  ArmRule rule;
  std::size_t first_armed = 0;
  while (!rule.armed(s.rows[first_armed])) ++first_armed;
  CHECK(first_armed > 10);
  for (std::size_t i = first_armed; i < s.rows.size(); ++i) {
    CHECK(s.rows[i].rel_alt_mm == s.rows[i].alt_mm - s.rows[first_armed].alt_mm);
  }
}
