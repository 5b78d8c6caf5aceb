#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fpvgl/logger/session.hpp"
#include "fpvgl/sim/scenario.hpp"

namespace fpvgl::rl {

class ExportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDatasetVersion = 1;
inline constexpr std::string_view kDatasetSchema = "fpvgl.episode";

struct PwmScale {
  double center_us = 1500;
  double span_us = 500;
  bool operator==(const PwmScale&) const = default;
};

// (pwm - center) / span clamped to [-1, 1]. Throws ExportError for NaN,
// the 65535 sentinel, or anything outside [800, 2200].
double normalize_pwm(double pwm_us, const PwmScale& scale = {});
double denormalize_pwm(double value, const PwmScale& scale = {});

enum class Axis { Roll, Pitch, Throttle, Yaw };

// RC channel (1-based) per axis, AETR by default.
struct ChannelMap {
  int roll = 1;
  int pitch = 2;
  int throttle = 3;
  int yaw = 4;

  int channel(Axis axis) const noexcept;
  void validate() const;
  bool operator==(const ChannelMap&) const = default;
};

// "roll=1,pitch=2,throttle=3,yaw=4"; every axis must appear exactly once.
ChannelMap parse_channel_map(std::string_view text);
std::string format_channel_map(const ChannelMap& map);

struct EpisodeState {
  double lat_deg = 0;
  double lon_deg = 0;
  double alt_m = 0;
  double vn = 0;  // m/s, NED
  double ve = 0;
  double vd = 0;
  double roll = 0;
  double pitch = 0;
  double yaw = 0;
  double dist_to_target_m = 0;
  double bearing_to_target_rad = 0;  // 0 = north, clockwise, like yaw
  std::filesystem::path front_frame;
  std::filesystem::path bottom_frame;

  bool operator==(const EpisodeState& o) const;  // NaN == NaN
};

struct EpisodeAction {
  double throttle = 0;
  double pitch = 0;
  double yaw = 0;
  double roll = 0;
  bool operator==(const EpisodeAction&) const = default;
};

struct EpisodeStep {
  double t = 0;  // s since the first armed row
  std::size_t source_row = 0;
  EpisodeState state;
  EpisodeAction action;
  bool operator==(const EpisodeStep&) const = default;
};

struct EpisodeDataset {
  sim::Scenario scenario;
  std::string session_id;
  std::string source;
  PwmScale scale;
  ChannelMap channels;
  std::vector<EpisodeStep> steps;  // frame paths absolute in memory

  bool operator==(const EpisodeDataset&) const = default;
};

// One step per armed row. Target geometry uses the scenario frame anchored
// at the takeoff pad (mean of the pre-arm fixes), east along +e.
EpisodeDataset export_episode(const logger::FlightSession& session, const sim::Scenario& scenario,
                              const ChannelMap& channels = {}, const logger::ArmRule& arm = {});

// JSON with frame paths stored relative to the file's directory.
std::string dataset_to_json(const EpisodeDataset& dataset, const std::filesystem::path& base_dir);
EpisodeDataset dataset_from_json(std::string_view text, const std::filesystem::path& base_dir);

void write_dataset(const EpisodeDataset& dataset, const std::filesystem::path& path);
EpisodeDataset read_dataset(const std::filesystem::path& path);

}  // namespace fpvgl::rl
