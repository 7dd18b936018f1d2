#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace broadcd {

/// Interleaved 8-bit RGB raster, row-major.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h) : width(w), height(h), pixels(w * h * 3, 0) {}

  std::size_t pixel_count() const noexcept { return width * height; }
  std::uint8_t* at(std::size_t x, std::size_t y) noexcept { return &pixels[(y * width + x) * 3]; }
  const std::uint8_t* at(std::size_t x, std::size_t y) const noexcept {
    return &pixels[(y * width + x) * 3];
  }

  bool operator==(const RgbImage&) const = default;
};

/// Single-channel 8-bit raster, row-major.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // width * height

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(w * h, fill) {}

  std::size_t pixel_count() const noexcept { return width * height; }
  std::uint8_t& at(std::size_t x, std::size_t y) noexcept { return pixels[y * width + x]; }
  std::uint8_t at(std::size_t x, std::size_t y) const noexcept { return pixels[y * width + x]; }

  bool operator==(const GrayImage&) const = default;
};

}  // namespace broadcd
