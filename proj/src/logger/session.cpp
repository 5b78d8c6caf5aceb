#include "fpvgl/logger/session.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <system_error>

#include "fpvgl/common/time.hpp"
#include "json.hpp"

namespace fpvgl::logger {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LoggerError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw LoggerError("write failed: " + path.string());
}

std::size_t count_files(const fs::path& dir) {
  std::size_t n = 0;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") ++n;
  }
  return n;
}

std::string header_line() {
  std::string h;
  for (const auto& c : csv_columns()) {
    if (!h.empty()) h += ',';
    h += c;
  }
  return h;
}

}  // namespace

const char* to_string(SourceTag tag) noexcept { return tag == SourceTag::Physical ? "physical" : "sim"; }

SourceTag parse_source_tag(std::string_view text) {
  if (text == "physical") return SourceTag::Physical;
  if (text == "sim") return SourceTag::Sim;
  throw std::invalid_argument("unknown source tag: " + std::string(text));
}

std::string frame_name(const char* view, std::size_t row, std::int64_t wall_ms) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s/%06zu_%013lld.png", view, row, static_cast<long long>(wall_ms));
  return buf;
}

SessionWriter::SessionWriter(fs::path dir, SourceTag source, ArmRule rule, std::ofstream csv)
    : dir_(std::move(dir)),
      source_(source),
      rule_(rule),
      csv_(std::move(csv)),
      baseline_alt_mm_(std::numeric_limits<double>::quiet_NaN()) {}

SessionWriter::SessionWriter(SessionWriter&& o) noexcept
    : dir_(std::move(o.dir_)),
      source_(o.source_),
      rule_(o.rule_),
      csv_(std::move(o.csv_)),
      rows_(o.rows_),
      open_(o.open_),
      first_wall_ms_(o.first_wall_ms_),
      last_wall_ms_(o.last_wall_ms_),
      baseline_alt_mm_(o.baseline_alt_mm_),
      baseline_armed_(o.baseline_armed_),
      observer_(std::move(o.observer_)) {
  o.open_ = false;
}

SessionWriter::~SessionWriter() {
  if (open_) {
    try {
      close();
    } catch (...) {
    }
  }
}

SessionWriter SessionWriter::open(const fs::path& root, SourceTag source, std::int64_t now_ms,
                                  ArmRule rule) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw LoggerError("cannot create session root " + root.string() + ": " + ec.message());

  const std::string stamp = format_session_stamp(now_ms);
  fs::path dir;
  for (int k = 0;; ++k) {
    dir = root / (k == 0 ? stamp : stamp + "-" + std::to_string(k));
    if (fs::create_directory(dir, ec)) break;
    if (ec) throw LoggerError("cannot create session in " + root.string() + ": " + ec.message());
    if (k > 10000) throw LoggerError("too many sessions named " + stamp);
  }
  try {
    fs::create_directory(dir / "front");
    fs::create_directory(dir / "bottom");
    std::ofstream csv(dir / kCsvName, std::ios::binary | std::ios::trunc);
    csv << header_line() << '\n';
    csv.flush();
    if (!csv) throw LoggerError("cannot write " + (dir / kCsvName).string());
    return SessionWriter(dir, source, rule, std::move(csv));
  } catch (const std::exception& e) {
    fs::remove_all(dir, ec);
    throw LoggerError(std::string("cannot open session: ") + e.what());
  }
}

std::size_t SessionWriter::log_iteration(const TelemetrySnapshot& snapshot,
                                         std::span<const std::uint8_t> front,
                                         std::span<const std::uint8_t> bottom, std::int64_t wall_ms) {
  if (!open_) throw LoggerError("session is closed");
  if (front.empty() || bottom.empty()) throw std::invalid_argument("log_iteration: empty frame");
  if (rows_ > 0 && wall_ms <= last_wall_ms_) {
    throw std::invalid_argument("log_iteration: wall time must increase");
  }

  IterationRow row = row_from_snapshot(snapshot);
  row.wall_ms = wall_ms;
  row.front_frame = frame_name("front", rows_, wall_ms);
  row.bottom_frame = frame_name("bottom", rows_, wall_ms);

  double baseline = baseline_alt_mm_;
  bool baseline_armed = baseline_armed_;
  if (!std::isnan(row.alt_mm)) {
    if (std::isnan(baseline)) baseline = row.alt_mm;
    if (!baseline_armed && rule_.armed(row)) {
      baseline = row.alt_mm;
      baseline_armed = true;
    }
  }
  row.rel_alt_mm = row.alt_mm - baseline;

  const fs::path front_path = dir_ / row.front_frame;
  const fs::path bottom_path = dir_ / row.bottom_frame;
  const fs::path front_tmp = front_path.string() + ".tmp";
  const fs::path bottom_tmp = bottom_path.string() + ".tmp";
  const std::string line = format_csv_row(row) + '\n';
  const auto csv_size = static_cast<std::uintmax_t>(csv_.tellp());

  std::error_code ec;
  try {
    write_file(front_tmp, front);
    write_file(bottom_tmp, bottom);
    fs::rename(front_tmp, front_path);
    fs::rename(bottom_tmp, bottom_path);
    csv_.write(line.data(), static_cast<std::streamsize>(line.size()));
    csv_.flush();
    if (!csv_) throw LoggerError("write failed: " + (dir_ / kCsvName).string());
  } catch (const std::exception& e) {
    for (const auto& p : {front_tmp, bottom_tmp, front_path, bottom_path}) fs::remove(p, ec);
    csv_.clear();
    fs::resize_file(dir_ / kCsvName, csv_size, ec);
    csv_.seekp(static_cast<std::streamoff>(csv_size));
    throw LoggerError(std::string("row ") + std::to_string(rows_) + " not logged: " + e.what());
  }

  baseline_alt_mm_ = baseline;
  baseline_armed_ = baseline_armed;
  if (rows_ == 0) first_wall_ms_ = wall_ms;
  last_wall_ms_ = wall_ms;
  if (observer_) observer_(row);
  return rows_++;
}

SessionManifest SessionWriter::close() {
  if (!open_) throw LoggerError("session already closed");
  open_ = false;
  csv_.close();

  SessionManifest m;
  m.session_id = dir_.filename().string();
  m.row_count = rows_;
  m.front_frame_count = count_files(dir_ / "front");
  m.bottom_frame_count = count_files(dir_ / "bottom");
  m.start_wall_ms = first_wall_ms_;
  m.end_wall_ms = last_wall_ms_;
  m.source = source_;
  m.arm_threshold_us = rule_.threshold_us;

  json j;
  j["format_version"] = kManifestVersion;
  j["session_id"] = m.session_id;
  j["source"] = to_string(m.source);
  j["row_count"] = m.row_count;
  j["front_frame_count"] = m.front_frame_count;
  j["bottom_frame_count"] = m.bottom_frame_count;
  j["start_wall_time"] = rows_ ? json(format_iso8601_ms(m.start_wall_ms)) : json(nullptr);
  j["end_wall_time"] = rows_ ? json(format_iso8601_ms(m.end_wall_ms)) : json(nullptr);
  j["arm_threshold_us"] = m.arm_threshold_us;
  const fs::path tmp = dir_ / "manifest.json.tmp";
  const std::string text = j.dump(2) + "\n";
  write_file(tmp, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  fs::rename(tmp, dir_ / kManifestName);
  if (m.front_frame_count != rows_ || m.bottom_frame_count != rows_) {
    throw LoggerError("frame count does not match row count in " + dir_.string());
  }
  return m;
}

FlightSession read_session(const fs::path& dir) {
  FlightSession s;
  s.dir = dir;

  std::ifstream mf(dir / kManifestName);
  if (!mf) throw LoggerError("manifest: cannot read " + (dir / kManifestName).string());
  try {
    const json j = json::parse(mf);
    if (j.at("format_version").get<int>() != kManifestVersion) {
      throw LoggerError("manifest: unsupported format_version");
    }
    s.manifest.session_id = j.at("session_id").get<std::string>();
    s.manifest.source = parse_source_tag(j.at("source").get<std::string>());
    s.manifest.row_count = j.at("row_count").get<std::size_t>();
    s.manifest.front_frame_count = j.at("front_frame_count").get<std::size_t>();
    s.manifest.bottom_frame_count = j.at("bottom_frame_count").get<std::size_t>();
    if (!j.at("start_wall_time").is_null()) {
      s.manifest.start_wall_ms = parse_iso8601_ms(j.at("start_wall_time").get<std::string>());
      s.manifest.end_wall_ms = parse_iso8601_ms(j.at("end_wall_time").get<std::string>());
    }
    s.manifest.arm_threshold_us = j.value("arm_threshold_us", 1100.0);
  } catch (const LoggerError&) {
    throw;
  } catch (const std::exception& e) {
    throw LoggerError(std::string("manifest: ") + e.what());
  }

  std::ifstream csv(dir / kCsvName, std::ios::binary);
  if (!csv) throw LoggerError("cannot read " + (dir / kCsvName).string());
  std::string line;
  if (!std::getline(csv, line) || line != header_line()) throw LoggerError("flight.csv: bad header");
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const std::size_t index = s.rows.size();
    IterationRow row;
    try {
      row = parse_csv_row(line);
    } catch (const std::exception& e) {
      throw LoggerError("row " + std::to_string(index) + ": " + e.what());
    }
    if (!s.rows.empty() && row.wall_ms <= s.rows.back().wall_ms) {
      throw LoggerError("row " + std::to_string(index) + ": wall timestamp not increasing");
    }
    for (const auto* name : {&row.front_frame, &row.bottom_frame}) {
      if (!fs::is_regular_file(dir / *name)) {
        throw LoggerError("row " + std::to_string(index) + ": missing frame " + *name);
      }
    }
    s.rows.push_back(std::move(row));
  }

  const auto& m = s.manifest;
  if (m.row_count != s.rows.size() || m.front_frame_count != m.row_count ||
      m.bottom_frame_count != m.row_count) {
    std::ostringstream msg;
    msg << "manifest: counts disagree (manifest rows " << m.row_count << ", csv rows " << s.rows.size()
        << ", front " << m.front_frame_count << ", bottom " << m.bottom_frame_count << ")";
    throw LoggerError(msg.str());
  }
  return s;
}

}  // namespace fpvgl::logger
