#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpvgl/geodesy/geodesy.hpp"
#include "fpvgl/logger/session.hpp"

namespace fpvgl::analysis {

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ThresholdNeverReached : public AnalysisError {
 public:
  using AnalysisError::AnalysisError;
};

enum class AltitudeMode { Relative, Gps };
AltitudeMode parse_altitude_mode(std::string_view text);

// Where the local frame is anchored.
//   FirstFix:   the first valid GPS fix.
//   GroundMean: the mean of the fixes logged before arming, which averages
//               out receiver noise while the craft sits on the pad. Falls
//               back to FirstFix when the log starts armed.
enum class OriginRule { FirstFix, GroundMean };

struct TrackSample {
  double t = 0;  // s from the first sample
  double x = 0;  // along the aligned east axis
  double y = 0;
  double z = 0;
  bool armed = false;

  bool operator==(const TrackSample&) const = default;
};

struct LocalTrack {
  std::vector<TrackSample> samples;
  geo::Geodetic origin{};
  double rotation_rad = 0;  // applied about Up to align the reference east
  std::size_t first_row = 0;  // session row of samples[0]
};

struct TrackOptions {
  AltitudeMode altitude = AltitudeMode::Relative;
  OriginRule origin = OriginRule::GroundMean;
  logger::ArmRule arm{};
};

// Local frame anchor for the rows with a fix; nullopt if none has one.
std::optional<geo::Geodetic> track_origin(std::span<const logger::IterationRow> rows, OriginRule rule,
                                          const logger::ArmRule& arm = {});

LocalTrack build_track(std::span<const logger::IterationRow> rows, const geo::Geodetic& reference_point,
                       const TrackOptions& options = {});
inline LocalTrack build_track(const logger::FlightSession& session, const geo::Geodetic& reference_point,
                              const TrackOptions& options = {}) {
  return build_track(session.rows, reference_point, options);
}

struct SegmentRules {
  double hover_altitude_m = 4.0;
  double hover_window_s = 10.0;
  double course_start_x = 0.0;  // x where the course begins
  double start_offset_m = 2.0;
  double end_offset_m = 2.0;
};

struct ManeuverSegment {
  int task = 1;
  std::size_t start_index = 0;
  std::size_t end_index = 0;
  std::string rule;

  std::size_t size() const noexcept { return end_index - start_index + 1; }
  bool operator==(const ManeuverSegment&) const = default;
};

// Task 1: from the first sample at or above the hover altitude to the last
// sample within the hover window after it.
// Tasks 2-4: from the first sample past course_start_x + start_offset to the
// last sample at least end_offset away (along x) from where the trail ends.
ManeuverSegment extract_segment(const LocalTrack& track, int task, const SegmentRules& rules = {});

struct TrailBounds {
  std::size_t first = 0;
  std::size_t last = 0;
};

// First to last armed sample; the whole track when nothing is marked armed.
TrailBounds trail_bounds(const LocalTrack& track);

struct TaskMetrics {
  int task = 1;
  std::string platform_tag;
  std::optional<double> hover_distance_m;
  std::optional<double> lateral_deviation_m;
  double height_deviation_m = 0;
  double trail_time_s = 0;
  std::size_t segment_samples = 0;

  bool operator==(const TaskMetrics&) const = default;
};

TaskMetrics compute_metrics(const LocalTrack& track, const ManeuverSegment& segment, int task,
                            const TrailBounds& trail, std::string platform_tag = "sim");

// "physical" and "sim" render as the two platform names; anything else is
// printed as given.
std::string platform_name(const std::string& tag);
std::string task_title(int task);

// One table per task present, rows in input order.
std::string render_report(std::span<const TaskMetrics> metrics);

struct SeriesFiles {
  std::filesystem::path t_x, t_y, t_z, bird_view, polyline;
};

// Writes tx.dat, ty.dat, tz.dat, xy.dat and xyz.dat into dir.
SeriesFiles write_series(const LocalTrack& track, const std::filesystem::path& dir);
std::vector<std::vector<double>> read_series(const std::filesystem::path& file);

}  // namespace fpvgl::analysis
