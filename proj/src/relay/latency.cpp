#include "fpvgl/relay/latency.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fpvgl::relay {

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

LatencyReport summarize_latency(std::span<const double> seconds) {
  if (seconds.empty()) throw NoSamples();
  std::vector<double> sorted(seconds.begin(), seconds.end());
  std::sort(sorted.begin(), sorted.end());
  return {sorted.size(), sorted.front(), quantile(sorted, 0.5), quantile(sorted, 0.95),
          sorted.back()};
}

}  // namespace fpvgl::relay
