#include "fpvgl/logger/row.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "fpvgl/common/time.hpp"

namespace fpvgl::logger {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

void put(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
    return;
  }
  char buf[32];
  char* end;
  if (v == std::trunc(v) && std::abs(v) < 1e15) {
    end = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(v)).ptr;
  } else {
    end = std::to_chars(buf, buf + sizeof buf, v).ptr;
  }
  out.append(buf, end);
}

double get(std::string_view field, const std::string& name) {
  if (field == "nan") return kNaN;
  double v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || std::isnan(v)) {
    throw std::invalid_argument("bad value '" + std::string(field) + "' in column " + name);
  }
  return v;
}

// Numeric columns in file order, after wall_timestamp.
template <class Row, class F>
void each_number(Row& r, F&& f) {
  f(r.time_boot_ms, "time_boot_ms");
  f(r.lat_1e7, "lat_1e7");
  f(r.lon_1e7, "lon_1e7");
  f(r.alt_mm, "alt_mm");
  f(r.rel_alt_mm, "rel_alt_mm");
  f(r.vx_cms, "vx_cms");
  f(r.vy_cms, "vy_cms");
  f(r.vz_cms, "vz_cms");
  f(r.hdg_cdeg, "hdg_cdeg");
  f(r.groundspeed_ms, "groundspeed_ms");
  f(r.climb_ms, "climb_ms");
  f(r.roll_rad, "roll_rad");
  f(r.pitch_rad, "pitch_rad");
  f(r.yaw_rad, "yaw_rad");
  static const char* rc[] = {"rc1_us", "rc2_us", "rc3_us", "rc4_us", "rc5_us", "rc6_us", "rc7_us", "rc8_us"};
  static const char* sv[] = {"servo1_us", "servo2_us", "servo3_us", "servo4_us",
                             "servo5_us", "servo6_us", "servo7_us", "servo8_us"};
  for (int i = 0; i < 8; ++i) f(r.rc_us[i], rc[i]);
  for (int i = 0; i < 8; ++i) f(r.servo_us[i], sv[i]);
}

}  // namespace

void TelemetrySnapshot::apply(const mavlink::Message& message) {
  std::visit(
      [this](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, mavlink::Heartbeat>) heartbeat = m;
        else if constexpr (std::is_same_v<T, mavlink::GpsRawInt>) gps_raw = m;
        else if constexpr (std::is_same_v<T, mavlink::Attitude>) attitude = m;
        else if constexpr (std::is_same_v<T, mavlink::GlobalPositionInt>) global_position = m;
        else if constexpr (std::is_same_v<T, mavlink::VfrHud>) vfr_hud = m;
        else if constexpr (std::is_same_v<T, mavlink::RcChannels>) rc_channels = m;
        else if constexpr (std::is_same_v<T, mavlink::ServoOutputRaw>) servo_output = m;
      },
      message);
}

std::optional<std::uint32_t> TelemetrySnapshot::time_boot_ms() const {
  std::optional<std::uint32_t> t;
  auto take = [&](std::uint32_t v) { t = t ? std::max(*t, v) : v; };
  if (global_position) take(global_position->time_boot_ms);
  if (attitude) take(attitude->time_boot_ms);
  if (rc_channels) take(rc_channels->time_boot_ms);
  return t;
}

bool IterationRow::has_position() const noexcept {
  return !std::isnan(lat_1e7) && !std::isnan(lon_1e7) && !std::isnan(alt_mm);
}

bool IterationRow::operator==(const IterationRow& o) const noexcept {
  if (wall_ms != o.wall_ms || front_frame != o.front_frame || bottom_frame != o.bottom_frame) return false;
  bool eq = true;
  std::vector<double> mine, theirs;
  each_number(*this, [&](const double& v, const char*) { mine.push_back(v); });
  each_number(o, [&](const double& v, const char*) { theirs.push_back(v); });
  for (std::size_t i = 0; i < mine.size(); ++i) eq = eq && same(mine[i], theirs[i]);
  return eq;
}

bool ArmRule::armed(const IterationRow& row) const noexcept {
  for (int i = 0; i < motors && i < 8; ++i) {
    if (!(row.servo_us[i] >= threshold_us)) return false;
  }
  return true;
}

IterationRow row_from_snapshot(const TelemetrySnapshot& s) {
  IterationRow r;
  each_number(r, [](double& v, const char*) { v = kNaN; });
  if (auto t = s.time_boot_ms()) r.time_boot_ms = *t;
  if (s.global_position) {
    const auto& g = *s.global_position;
    r.lat_1e7 = g.lat;
    r.lon_1e7 = g.lon;
    r.alt_mm = g.alt;
    r.vx_cms = g.vx;
    r.vy_cms = g.vy;
    r.vz_cms = g.vz;
    r.hdg_cdeg = g.hdg == 65535 ? kNaN : g.hdg;
  } else if (s.gps_raw) {
    r.lat_1e7 = s.gps_raw->lat;
    r.lon_1e7 = s.gps_raw->lon;
    r.alt_mm = s.gps_raw->alt;
  }
  if (s.vfr_hud) {
    r.groundspeed_ms = s.vfr_hud->groundspeed;
    r.climb_ms = s.vfr_hud->climb;
  }
  if (s.attitude) {
    r.roll_rad = s.attitude->roll;
    r.pitch_rad = s.attitude->pitch;
    r.yaw_rad = s.attitude->yaw;
  }
  if (s.rc_channels) {
    for (int i = 0; i < 8; ++i) {
      const auto v = s.rc_channels->chan[i];
      r.rc_us[i] = v == 65535 ? kNaN : v;
    }
  }
  if (s.servo_output) {
    for (int i = 0; i < 8; ++i) r.servo_us[i] = s.servo_output->servo[i];
  }
  return r;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"wall_timestamp"};
    IterationRow r;
    each_number(r, [&](double&, const char* name) { c.emplace_back(name); });
    c.emplace_back("front_frame");
    c.emplace_back("bottom_frame");
    return c;
  }();
  return cols;
}

std::string format_csv_row(const IterationRow& row) {
  std::string out = format_iso8601_ms(row.wall_ms);
  each_number(row, [&](const double& v, const char*) {
    out += ',';
    put(out, v);
  });
  for (const std::string* name : {&row.front_frame, &row.bottom_frame}) {
    if (name->find_first_of(",\n\r\"") != std::string::npos) {
      throw std::invalid_argument("frame name not representable in csv: " + *name);
    }
    out += ',';
    out += *name;
  }
  return out;
}

IterationRow parse_csv_row(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    fields.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  const auto& cols = csv_columns();
  if (fields.size() != cols.size()) {
    throw std::invalid_argument("expected " + std::to_string(cols.size()) + " fields, got " +
                                std::to_string(fields.size()));
  }
  IterationRow r;
  r.wall_ms = parse_iso8601_ms(fields[0]);
  std::size_t i = 1;
  each_number(r, [&](double& v, const char* name) { v = get(fields[i++], name); });
  r.front_frame = std::string(fields[i++]);
  r.bottom_frame = std::string(fields[i++]);
  if (r.front_frame.empty() || r.bottom_frame.empty()) throw std::invalid_argument("missing frame name");
  return r;
}

}  // namespace fpvgl::logger
