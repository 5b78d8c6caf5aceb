#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpvgl/logger/row.hpp"

namespace fpvgl::logger {

enum class SourceTag { Physical, Sim };

const char* to_string(SourceTag tag) noexcept;
SourceTag parse_source_tag(std::string_view text);

class LoggerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SessionManifest {
  std::string session_id;
  std::size_t row_count = 0;
  std::size_t front_frame_count = 0;
  std::size_t bottom_frame_count = 0;
  std::int64_t start_wall_ms = 0;
  std::int64_t end_wall_ms = 0;
  SourceTag source = SourceTag::Sim;
  double arm_threshold_us = 1100;

  bool operator==(const SessionManifest&) const = default;
};

inline constexpr const char* kCsvName = "flight.csv";
inline constexpr const char* kManifestName = "manifest.json";

class SessionWriter {
 public:
  // Creates <root>/<YYYYMMDD-HHMMSS>[-k]/ with flight.csv, front/ and bottom/.
  static SessionWriter open(const std::filesystem::path& root, SourceTag source,
                            std::int64_t now_ms, ArmRule rule = {});

  SessionWriter(SessionWriter&&) noexcept;
  SessionWriter& operator=(SessionWriter&&) = delete;
  ~SessionWriter();

  // Appends one row and its two frames, or nothing at all. Returns the row
  // index.
  std::size_t log_iteration(const TelemetrySnapshot& snapshot, std::span<const std::uint8_t> front,
                            std::span<const std::uint8_t> bottom, std::int64_t wall_ms);

  // Writes manifest.json. Further logging is an error.
  SessionManifest close();

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::size_t row_count() const noexcept { return rows_; }
  bool is_open() const noexcept { return open_; }
  std::int64_t last_wall_ms() const noexcept { return last_wall_ms_; }

  // Called with every row after it is on disk.
  void on_row(std::function<void(const IterationRow&)> observer) { observer_ = std::move(observer); }

 private:
  SessionWriter(std::filesystem::path dir, SourceTag source, ArmRule rule, std::ofstream csv);

  std::filesystem::path dir_;
  SourceTag source_;
  ArmRule rule_;
  std::ofstream csv_;
  std::size_t rows_ = 0;
  bool open_ = true;
  std::int64_t first_wall_ms_ = 0;
  std::int64_t last_wall_ms_ = 0;
  double baseline_alt_mm_;
  bool baseline_armed_ = false;
  std::function<void(const IterationRow&)> observer_;
};

struct FlightSession {
  std::filesystem::path dir;
  SessionManifest manifest;
  std::vector<IterationRow> rows;
};

// Parses and validates a session directory. Errors name the offending row.
FlightSession read_session(const std::filesystem::path& dir);

std::string frame_name(const char* view, std::size_t row, std::int64_t wall_ms);

}  // namespace fpvgl::logger
