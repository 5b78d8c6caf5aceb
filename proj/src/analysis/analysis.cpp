#include "fpvgl/analysis/analysis.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace fpvgl::analysis {

namespace fs = std::filesystem;

namespace {

struct Welford {
  std::size_t n = 0;
  double mean = 0;
  double m2 = 0;
  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
  double population_std() const { return std::sqrt(m2 / static_cast<double>(n)); }
};

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void put(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw AnalysisError("cannot write " + path.string());
}

}  // namespace

AltitudeMode parse_altitude_mode(std::string_view text) {
  if (text == "relative") return AltitudeMode::Relative;
  if (text == "gps") return AltitudeMode::Gps;
  throw std::invalid_argument("altitude mode must be relative or gps");
}

std::optional<geo::Geodetic> track_origin(std::span<const logger::IterationRow> rows, OriginRule rule,
                                          const logger::ArmRule& arm) {
  const logger::IterationRow* first = nullptr;
  double lat = 0, lon = 0, alt = 0;
  std::size_t n = 0;
  bool armed = false;
  for (const auto& r : rows) {
    if (!r.has_position()) continue;
    if (!first) first = &r;
    if (rule == OriginRule::FirstFix) break;
    armed = armed || arm.armed(r);
    if (armed) break;
    lat += r.lat_1e7;
    lon += r.lon_1e7;
    alt += r.alt_mm;
    ++n;
  }
  if (!first) return std::nullopt;
  if (n > 0) return geo::Geodetic{lat / n * 1e-7, lon / n * 1e-7, alt / n * 1e-3};
  return geo::from_scaled(static_cast<std::int64_t>(first->lat_1e7), static_cast<std::int64_t>(first->lon_1e7),
                          static_cast<std::int64_t>(first->alt_mm));
}

LocalTrack build_track(std::span<const logger::IterationRow> rows, const geo::Geodetic& reference_point,
                       const TrackOptions& options) {
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].has_position()) continue;
    if (options.altitude == AltitudeMode::Relative && std::isnan(rows[i].rel_alt_mm)) continue;
    valid.push_back(i);
  }
  if (valid.empty()) throw AnalysisError("no rows with a valid GPS fix");
  if (valid.size() < 2) throw AnalysisError("fewer than two rows with a valid GPS fix");

  LocalTrack track;
  track.first_row = valid.front();
  track.origin = *track_origin(rows, options.origin, options.arm);

  std::vector<geo::Enu> enu;
  enu.reserve(valid.size());
  for (std::size_t i : valid) {
    const auto& r = rows[i];
    const geo::Geodetic g{r.lat_1e7 * 1e-7, r.lon_1e7 * 1e-7, r.alt_mm * 1e-3};
    enu.push_back(geo::geodetic_to_enu(g, track.origin));
  }
  const geo::Enu ref = geo::geodetic_to_enu(reference_point, track.origin);
  std::vector<geo::Enu> aligned;
  try {
    track.rotation_rad = -geo::horizontal_bearing(ref);
    aligned = geo::align_to_east(enu, ref);
  } catch (const geo::GeodesyError&) {
    throw AnalysisError("reference point coincides with the track origin");
  }

  const double t0 = static_cast<double>(rows[valid.front()].wall_ms);
  track.samples.reserve(valid.size());
  for (std::size_t k = 0; k < valid.size(); ++k) {
    const auto& r = rows[valid[k]];
    TrackSample s;
    s.t = (static_cast<double>(r.wall_ms) - t0) / 1000.0;
    s.x = aligned[k].e;
    s.y = aligned[k].n;
    s.z = options.altitude == AltitudeMode::Relative ? r.rel_alt_mm / 1000.0 : aligned[k].u;
    s.armed = options.arm.armed(r);
    if (!track.samples.empty() && s.t <= track.samples.back().t) {
      throw AnalysisError("row " + std::to_string(valid[k]) + ": time does not increase");
    }
    track.samples.push_back(s);
  }
  return track;
}

ManeuverSegment extract_segment(const LocalTrack& track, int task, const SegmentRules& rules) {
  const auto& s = track.samples;
  if (task < 1 || task > 4) throw std::invalid_argument("task must be 1..4");
  if (s.empty()) throw AnalysisError("empty track");
  ManeuverSegment seg;
  seg.task = task;

  if (task == 1) {
    std::size_t start = s.size();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i].z >= rules.hover_altitude_m) {
        start = i;
        break;
      }
    }
    char what[128];
    std::snprintf(what, sizeof what, "altitude never reached %g m", rules.hover_altitude_m);
    if (start == s.size()) throw ThresholdNeverReached(what);
    std::size_t end = start;
    for (std::size_t i = start; i < s.size() && s[i].t <= s[start].t + rules.hover_window_s; ++i) end = i;
    if (end == start) throw ThresholdNeverReached("no samples within the hover window");
    seg.start_index = start;
    seg.end_index = end;
    std::snprintf(what, sizeof what, "first z >= %g m, then %g s", rules.hover_altitude_m,
                  rules.hover_window_s);
    seg.rule = what;
    return seg;
  }

  const double x_start = rules.course_start_x + rules.start_offset_m;
  std::size_t start = s.size();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].x >= x_start) {
      start = i;
      break;
    }
  }
  char what[160];
  std::snprintf(what, sizeof what, "longitudinal position never reached %g m", x_start);
  if (start == s.size()) throw ThresholdNeverReached(what);
  const double x_end = s.back().x;
  std::size_t end = s.size();
  for (std::size_t i = s.size(); i-- > start;) {
    if (std::abs(s[i].x - x_end) >= rules.end_offset_m) {
      end = i;
      break;
    }
  }
  if (end == s.size() || end <= start) {
    std::snprintf(what, sizeof what, "trail never left the %g m band before its end", rules.end_offset_m);
    throw ThresholdNeverReached(what);
  }
  seg.start_index = start;
  seg.end_index = end;
  std::snprintf(what, sizeof what, "first x >= %g m to last |x - x_end| >= %g m", x_start, rules.end_offset_m);
  seg.rule = what;
  return seg;
}

TrailBounds trail_bounds(const LocalTrack& track) {
  const auto& s = track.samples;
  if (s.empty()) throw AnalysisError("empty track");
  TrailBounds b{s.size(), 0};
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].armed) {
      b.first = std::min(b.first, i);
      b.last = i;
    }
  }
  if (b.first == s.size()) return {0, s.size() - 1};
  return b;
}

TaskMetrics compute_metrics(const LocalTrack& track, const ManeuverSegment& seg, int task,
                            const TrailBounds& trail, std::string platform_tag) {
  const auto& s = track.samples;
  if (seg.end_index >= s.size() || seg.start_index >= seg.end_index) {
    throw AnalysisError("segment shorter than 2 samples");
  }
  if (trail.last >= s.size() || trail.first > trail.last) throw AnalysisError("trail bounds out of range");
  TaskMetrics m;
  m.task = task;
  m.platform_tag = std::move(platform_tag);
  Welford y, z, r;
  for (std::size_t i = seg.start_index; i <= seg.end_index; ++i) {
    y.add(s[i].y);
    z.add(s[i].z);
    r.add(std::hypot(s[i].x, s[i].y));
  }
  if (task == 1) {
    m.hover_distance_m = r.mean;
  } else {
    m.lateral_deviation_m = y.population_std();
  }
  m.height_deviation_m = z.population_std();
  m.trail_time_s = s[trail.last].t - s[trail.first].t;
  m.segment_samples = seg.size();
  return m;
}

std::string platform_name(const std::string& tag) {
  if (tag == "physical") return "Physical quadcopter";
  if (tag == "sim") return "Digital twin";
  return tag;
}

std::string task_title(int task) {
  switch (task) {
    case 1: return "Take off, hover, and land";
    case 2: return "Flying from point A to B";
    case 3: return "Obstacle avoidance";
    case 4: return "Flying Figure 8";
  }
  throw std::invalid_argument("task must be 1..4");
}

std::string render_report(std::span<const TaskMetrics> metrics) {
  std::map<int, std::vector<const TaskMetrics*>> by_task;
  for (const auto& m : metrics) by_task[m.task].push_back(&m);
  std::string out;
  for (const auto& [task, rows] : by_task) {
    bool physical = false, twin = false;
    for (const auto* m : rows) {
      physical = physical || m->platform_tag == "physical";
      twin = twin || m->platform_tag == "sim";
    }
    if (!out.empty()) out += "\n";
    out += "Task " + std::to_string(task) + ": " + task_title(task) + " flown trails information";
    if (physical && twin) out += " using both platforms";
    out += "\n";
    const std::string first_col = task == 1 ? "Hovering distance to origin (m)" : "Lateral deviation (m)";
    out += "| Platform used | " + first_col + " | Height deviation (m) | Trail time length (s) |\n";
    out += "|---|---|---|---|\n";
    for (const auto* m : rows) {
      const double lead = task == 1 ? m->hover_distance_m.value_or(NAN) : m->lateral_deviation_m.value_or(NAN);
      out += "| " + platform_name(m->platform_tag) + " | " + fixed4(lead) + " | " +
             fixed4(m->height_deviation_m) + " | " + fixed4(m->trail_time_s) + " |\n";
    }
  }
  out += "\nDeviations are population standard deviations over the maneuver segment, "
         "taken about the segment mean.\n";
  return out;
}

SeriesFiles write_series(const LocalTrack& track, const fs::path& dir) {
  fs::create_directories(dir);
  SeriesFiles f{dir / "tx.dat", dir / "ty.dat", dir / "tz.dat", dir / "xy.dat", dir / "xyz.dat"};
  std::string tx, ty, tz, xy, xyz;
  auto row = [](std::string& out, std::initializer_list<double> vs) {
    bool first = true;
    for (double v : vs) {
      if (!first) out += ' ';
      put(out, v);
      first = false;
    }
    out += '\n';
  };
  for (const auto& s : track.samples) {
    row(tx, {s.t, s.x});
    row(ty, {s.t, s.y});
    row(tz, {s.t, s.z});
    row(xy, {s.x, s.y});
    row(xyz, {s.x, s.y, s.z});
  }
  write_text(f.t_x, tx);
  write_text(f.t_y, ty);
  write_text(f.t_z, tz);
  write_text(f.bird_view, xy);
  write_text(f.polyline, xyz);
  return f;
}

std::vector<std::vector<double>> read_series(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw AnalysisError("cannot read " + file.string());
  std::vector<std::vector<double>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw AnalysisError("bad number in " + file.string());
      row.push_back(v);
      p = next;
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace fpvgl::analysis
