#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace fpvgl::sim {

enum class View { Front, Bottom };

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat synthetic camera frame, PNG encoded. A row of black/white blocks
// along the top edge carries `stamp` so a frame can be matched to the
// telemetry it was logged with.
std::vector<std::uint8_t> render_frame(View view, std::uint32_t stamp);

std::uint32_t read_frame_stamp(std::span<const std::uint8_t> png);

inline constexpr int kFrameWidth = 160;
inline constexpr int kFrameHeight = 120;

}  // namespace fpvgl::sim
