#include "broadcd/png_io.hpp"

#include <png.h>

#include <cstring>
#include <fstream>
#include <string>

#include "broadcd/error.hpp"

namespace broadcd::png {
namespace {

struct ImageGuard {
  png_image image{};
  ImageGuard() {
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
  }
  ~ImageGuard() { png_image_free(&image); }
  ImageGuard(const ImageGuard&) = delete;
  ImageGuard& operator=(const ImageGuard&) = delete;
};

RgbImage finish_read(ImageGuard& guard, const std::string& what) {
  guard.image.format = PNG_FORMAT_RGB;
  if (guard.image.width == 0 || guard.image.height == 0) {
    throw Error(ErrorCode::DecodeError, what + ": empty image");
  }
  RgbImage out(guard.image.width, guard.image.height);
  if (png_image_finish_read(&guard.image, nullptr, out.pixels.data(), 0, nullptr) == 0) {
    throw Error(ErrorCode::DecodeError, what + ": " + guard.image.message);
  }
  return out;
}

std::vector<std::uint8_t> encode_raw(const std::uint8_t* data, std::size_t width,
                                     std::size_t height, png_uint_32 format) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::EncodeError, "cannot encode an empty raster");
  }
  ImageGuard guard;
  guard.image.width = static_cast<png_uint_32>(width);
  guard.image.height = static_cast<png_uint_32>(height);
  guard.image.format = format;

  png_alloc_size_t size = 0;
  if (png_image_write_to_memory(&guard.image, nullptr, &size, 0, data, 0, nullptr) == 0) {
    throw Error(ErrorCode::EncodeError, std::string("sizing PNG: ") + guard.image.message);
  }
  std::vector<std::uint8_t> bytes(size);
  if (png_image_write_to_memory(&guard.image, bytes.data(), &size, 0, data, 0, nullptr) == 0) {
    throw Error(ErrorCode::EncodeError, std::string("writing PNG: ") + guard.image.message);
  }
  bytes.resize(size);
  return bytes;
}

RgbImage decode_labeled(std::span<const std::uint8_t> bytes, const std::string& what) {
  ImageGuard guard;
  if (bytes.empty()) {
    throw Error(ErrorCode::DecodeError, what + ": empty input");
  }
  if (png_image_begin_read_from_memory(&guard.image, bytes.data(), bytes.size()) == 0) {
    throw Error(ErrorCode::DecodeError, what + ": " + guard.image.message);
  }
  return finish_read(guard, what);
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorCode::IoError, "short write to " + path.string());
  }
}

}  // namespace

RgbImage read_rgb(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::DecodeError, "cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_labeled(bytes, path.string());
}

RgbImage decode_rgb(std::span<const std::uint8_t> bytes) { return decode_labeled(bytes, "PNG buffer"); }

std::vector<std::uint8_t> encode(const RgbImage& image) {
  return encode_raw(image.pixels.data(), image.width, image.height, PNG_FORMAT_RGB);
}

std::vector<std::uint8_t> encode(const GrayImage& image) {
  return encode_raw(image.pixels.data(), image.width, image.height, PNG_FORMAT_GRAY);
}

void write(const std::filesystem::path& path, const RgbImage& image) {
  write_bytes(path, encode(image));
}

void write(const std::filesystem::path& path, const GrayImage& image) {
  write_bytes(path, encode(image));
}

}  // namespace broadcd::png
