#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>

namespace fpvgl::relay {

/// Relay-segment delay: arrival time minus the envelope's source timestamp.
struct LatencyReport {
  std::size_t count = 0;
  double min_s = 0;
  double p50_s = 0;
  double p95_s = 0;
  double max_s = 0;
};

class NoSamples : public std::runtime_error {
 public:
  NoSamples() : std::runtime_error("latency report requested before any message arrived") {}
};

/// Quantiles use linear interpolation between order statistics.
LatencyReport summarize_latency(std::span<const double> seconds);

}  // namespace fpvgl::relay
