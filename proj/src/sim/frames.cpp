#include "fpvgl/sim/frames.hpp"

#include <png.h>

#include <array>
#include <cstring>

namespace fpvgl::sim {

namespace {

constexpr int kBlock = 4;
constexpr int kBits = 32;

using Rgb = std::array<std::uint8_t, 3>;

void fill(std::vector<std::uint8_t>& px, int x0, int y0, int w, int h, Rgb c) {
  for (int y = y0; y < y0 + h; ++y) {
    for (int x = x0; x < x0 + w; ++x) {
      std::memcpy(&px[(static_cast<std::size_t>(y) * kFrameWidth + x) * 3], c.data(), 3);
    }
  }
}

}  // namespace

std::vector<std::uint8_t> render_frame(View view, std::uint32_t stamp) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(kFrameWidth) * kFrameHeight * 3);
  if (view == View::Front) {
    fill(px, 0, 0, kFrameWidth, kFrameHeight / 2, {135, 180, 220});
    fill(px, 0, kFrameHeight / 2, kFrameWidth, kFrameHeight / 2, {96, 128, 72});
  } else {
    fill(px, 0, 0, kFrameWidth, kFrameHeight, {110, 110, 104});
    fill(px, kFrameWidth / 2 - 12, kFrameHeight / 2 - 12, 24, 24, {230, 200, 40});
  }
  for (int bit = 0; bit < kBits; ++bit) {
    const bool on = (stamp >> (kBits - 1 - bit)) & 1u;
    const std::uint8_t v = on ? 255 : 0;
    fill(px, bit * kBlock, 0, kBlock, kBlock, {v, v, v});
  }

  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = kFrameWidth;
  image.height = kFrameHeight;
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, px.data(), 0, nullptr)) {
    throw ImageError(std::string("png encode: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, px.data(), 0, nullptr)) {
    throw ImageError(std::string("png encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

std::uint32_t read_frame_stamp(std::span<const std::uint8_t> png) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, png.data(), png.size())) {
    throw ImageError(std::string("png decode: ") + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  if (image.width < static_cast<png_uint_32>(kBits * kBlock) || image.height < kBlock) {
    png_image_free(&image);
    throw ImageError("png decode: frame too small to carry a stamp");
  }
  std::vector<std::uint8_t> gray(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, gray.data(), 0, nullptr)) {
    throw ImageError(std::string("png decode: ") + image.message);
  }
  std::uint32_t stamp = 0;
  for (int bit = 0; bit < kBits; ++bit) {
    const std::uint8_t v = gray[static_cast<std::size_t>(kBlock / 2) * image.width + bit * kBlock + kBlock / 2];
    stamp = (stamp << 1) | (v > 127 ? 1u : 0u);
  }
  return stamp;
}

}  // namespace fpvgl::sim
