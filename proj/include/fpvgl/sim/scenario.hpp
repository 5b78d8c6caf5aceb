#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fpvgl::sim {

struct Point2 {
  double e = 0;
  double n = 0;
  bool operator==(const Point2&) const = default;
};

struct Obstacle {
  Point2 center;
  double height = 3.0;
  bool operator==(const Obstacle&) const = default;
};

struct Scenario {
  int task = 1;  // 1..4
  Point2 start;
  Point2 landing;
  std::vector<Obstacle> obstacles;
  double target_altitude = 4.0;

  std::string name() const { return "Task" + std::to_string(task); }
  bool operator==(const Scenario&) const = default;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Scenario default_scenario(int task);

// Throws ScenarioError if the geometry breaks the task's rules.
void validate(const Scenario& scenario);

// Text format, one directive per line, '#' starts a comment:
//   task 2
//   start 0 0
//   landing 20 0
//   obstacle 7 0 3
//   target_altitude 3
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);
std::string format_scenario(const Scenario& scenario);

}  // namespace fpvgl::sim
