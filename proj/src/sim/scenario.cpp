#include "fpvgl/sim/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fpvgl::sim {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw ScenarioError("scenario line " + std::to_string(line) + ": " + what);
}

double number(std::string_view tok, int line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    fail(line, "not a number: '" + std::string(tok) + "'");
  }
  return v;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

Scenario default_scenario(int task) {
  if (task < 1 || task > 4) throw ScenarioError("task must be 1..4");
  Scenario s;
  s.task = task;
  s.start = {0, 0};
  s.landing = task == 1 || task == 4 ? Point2{0, 0} : Point2{20, 0};
  s.obstacles = {{{7, 0}, 3.0}, {{13, 0}, 3.0}};
  s.target_altitude = task == 1 ? 4.0 : 3.0;
  return s;
}

void validate(const Scenario& s) {
  if (s.task < 1 || s.task > 4) throw ScenarioError("task must be 1..4");
  const double want_alt = s.task == 1 ? 4.0 : 3.0;
  if (s.target_altitude != want_alt) {
    throw ScenarioError(s.name() + " target_altitude must be " + fmt(want_alt));
  }
  if (s.task == 1) return;
  if (s.obstacles.size() != 2) throw ScenarioError(s.name() + " needs exactly two obstacles");
  for (const auto& o : s.obstacles) {
    if (o.height != 3.0) throw ScenarioError(s.name() + " obstacles must be 3 m tall");
  }
  // Obstacles sit on the segment from start to the far end of the course.
  // Task 4 returns home, so its course runs from start through both obstacles.
  const Point2 a = s.start;
  Point2 b = s.landing;
  if (s.task == 4) b = s.obstacles[1].center;
  const double dx = b.e - a.e, dy = b.n - a.n;
  const double len = std::hypot(dx, dy);
  if (len < 1.0) throw ScenarioError(s.name() + " course is too short");
  for (const auto& o : s.obstacles) {
    const double along = ((o.center.e - a.e) * dx + (o.center.n - a.n) * dy) / len;
    const double cross = ((o.center.n - a.n) * dx - (o.center.e - a.e) * dy) / len;
    if (std::abs(cross) > 0.05 || along <= 0 || along > len + 1e-9) {
      throw ScenarioError(s.name() + " obstacles must lie in line between start and landing");
    }
  }
}

Scenario parse_scenario(std::string_view text) {
  Scenario s;
  s.obstacles.clear();
  bool have_task = false, have_start = false, have_landing = false, have_alt = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = tokens(line);
    if (tok.empty()) continue;
    const std::string_view key = tok[0];
    auto arity = [&](std::size_t n) {
      if (tok.size() != n + 1) fail(line_no, std::string(key) + " takes " + std::to_string(n) + " value(s)");
    };
    if (key == "task" || key == "name") {
      arity(1);
      std::string_view v = tok[1];
      if (v.starts_with("Task")) v.remove_prefix(4);
      if (v.size() != 1 || v[0] < '1' || v[0] > '4') fail(line_no, "task must be 1..4");
      s.task = v[0] - '0';
      have_task = true;
    } else if (key == "start") {
      arity(2);
      s.start = {number(tok[1], line_no), number(tok[2], line_no)};
      have_start = true;
    } else if (key == "landing") {
      arity(2);
      s.landing = {number(tok[1], line_no), number(tok[2], line_no)};
      have_landing = true;
    } else if (key == "obstacle") {
      arity(3);
      s.obstacles.push_back({{number(tok[1], line_no), number(tok[2], line_no)}, number(tok[3], line_no)});
    } else if (key == "target_altitude") {
      arity(1);
      s.target_altitude = number(tok[1], line_no);
      have_alt = true;
    } else {
      fail(line_no, "unknown directive '" + std::string(key) + "'");
    }
  }
  if (!have_task) throw ScenarioError("scenario: missing 'task'");
  if (!have_start) throw ScenarioError("scenario: missing 'start'");
  if (!have_landing) throw ScenarioError("scenario: missing 'landing'");
  if (!have_alt) s.target_altitude = s.task == 1 ? 4.0 : 3.0;
  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read scenario " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string format_scenario(const Scenario& s) {
  std::string out;
  out += "task " + std::to_string(s.task) + "\n";
  out += "start " + fmt(s.start.e) + " " + fmt(s.start.n) + "\n";
  out += "landing " + fmt(s.landing.e) + " " + fmt(s.landing.n) + "\n";
  for (const auto& o : s.obstacles) {
    out += "obstacle " + fmt(o.center.e) + " " + fmt(o.center.n) + " " + fmt(o.height) + "\n";
  }
  out += "target_altitude " + fmt(s.target_altitude) + "\n";
  return out;
}

}  // namespace fpvgl::sim
