#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "broadcd/raster.hpp"

namespace broadcd::png {

// Decoding accepts any PNG libpng understands; grayscale input is replicated
// into all three channels and 16-bit samples are reduced to 8 bits.
RgbImage read_rgb(const std::filesystem::path& path);
RgbImage decode_rgb(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode(const RgbImage& image);
std::vector<std::uint8_t> encode(const GrayImage& image);

void write(const std::filesystem::path& path, const RgbImage& image);
void write(const std::filesystem::path& path, const GrayImage& image);

}  // namespace broadcd::png
