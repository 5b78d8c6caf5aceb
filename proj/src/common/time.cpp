#include "fpvgl/common/time.hpp"

#include <charconv>
#include <cstdio>
#include <ctime>
#include <stdexcept>

namespace fpvgl {

namespace {

std::tm utc_tm(std::int64_t epoch_ms) {
  std::int64_t secs = epoch_ms / 1000;
  if (epoch_ms % 1000 < 0) --secs;
  const std::time_t t = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  return tm;
}

int parse_int(std::string_view s, std::size_t pos, std::size_t len) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
  if (ec != std::errc{} || p != s.data() + pos + len) {
    throw std::invalid_argument("malformed timestamp: " + std::string(s));
  }
  return v;
}

}  // namespace

std::string format_iso8601_ms(std::int64_t epoch_ms) {
  const std::tm tm = utc_tm(epoch_ms);
  const int ms = static_cast<int>(((epoch_ms % 1000) + 1000) % 1000);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
  return buf;
}

std::int64_t parse_iso8601_ms(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SS.mmmZ
  if (s.size() != 24 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
      s[16] != ':' || s[19] != '.' || s[23] != 'Z') {
    throw std::invalid_argument("malformed timestamp: " + std::string(s));
  }
  std::tm tm{};
  tm.tm_year = parse_int(s, 0, 4) - 1900;
  tm.tm_mon = parse_int(s, 5, 2) - 1;
  tm.tm_mday = parse_int(s, 8, 2);
  tm.tm_hour = parse_int(s, 11, 2);
  tm.tm_min = parse_int(s, 14, 2);
  tm.tm_sec = parse_int(s, 17, 2);
  const int ms = parse_int(s, 20, 3);
  return static_cast<std::int64_t>(timegm(&tm)) * 1000 + ms;
}

std::string format_session_stamp(std::int64_t epoch_ms) {
  const std::tm tm = utc_tm(epoch_ms);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d%02d%02d-%02d%02d%02d", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

}  // namespace fpvgl
