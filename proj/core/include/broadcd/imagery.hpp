#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "broadcd/dataset.hpp"
#include "broadcd/raster.hpp"

namespace broadcd::imagery {

/// Co-registered reference/test rasters of identical size.
class ImagePair {
 public:
  /// Throws Error(DimensionMismatch) when the rasters differ in size and
  /// Error(InvalidArgument) when either is empty or malformed.
  ImagePair(RgbImage reference, RgbImage test);

  std::size_t width() const noexcept { return reference_.width; }
  std::size_t height() const noexcept { return reference_.height; }
  const RgbImage& reference() const noexcept { return reference_; }
  const RgbImage& test() const noexcept { return test_; }

 private:
  RgbImage reference_;
  RgbImage test_;
};

struct Lab {
  double l = 0.0;
  double a = 0.0;
  double b = 0.0;
};

/// Three doubles (L, a, b) per pixel, row-major.
struct LabImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;

  Lab at(std::size_t x, std::size_t y) const noexcept {
    const double* p = &values[(y * width + x) * 3];
    return {p[0], p[1], p[2]};
  }
};

/// Per-pixel change magnitude, row-major, all entries >= 0.
struct DifferenceImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;

  double at(std::size_t x, std::size_t y) const noexcept { return values[y * width + x]; }
  bool operator==(const DifferenceImage&) const = default;
};

struct LabelGrid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Label> labels;

  Label at(std::size_t x, std::size_t y) const noexcept { return labels[y * width + x]; }
  std::size_t count(Label label) const noexcept;
};

ImagePair load_image_pair(const std::filesystem::path& reference_path,
                          const std::filesystem::path& test_path);

/// sRGB (D65) to CIE L*a*b*.
Lab rgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;
LabImage rgb_to_lab(const RgbImage& image);

/// Euclidean norm of the per-channel absolute L*a*b* differences.
DifferenceImage difference_magnitude(const ImagePair& pair);
DifferenceImage difference_magnitude(const LabImage& reference, const LabImage& test);

/// Luminance > 127 marks a changed pixel.
LabelGrid binarize_mask(const RgbImage& mask);
LabelGrid binarize_mask(const std::filesystem::path& mask_path);

/// One pattern per pixel in row-major order: the 3x3 neighborhood of the
/// difference image with edge replication at the borders.
LabeledDataset extract_patterns(const DifferenceImage& diff, const LabelGrid& labels);

struct Split {
  LabeledDataset train;
  LabeledDataset test;
};

/// Stratified split: each class sends floor(fraction * count), at least one,
/// samples to train. Rows keep their original relative order.
Split split_dataset(const LabeledDataset& data, double train_fraction, std::uint64_t seed);

/// Per-dimension z-score map estimated on training data.
struct Standardization {
  Pattern mean{};
  Pattern scale{};  // population std, or 1 where the std is zero

  static Standardization identity() noexcept;
  static Standardization fit(const LabeledDataset& train);

  Pattern apply(const Pattern& p) const noexcept;
  LabeledDataset apply(const LabeledDataset& data) const;

  /// The single map equivalent to applying `first` and then `*this`.
  Standardization after(const Standardization& first) const noexcept;

  bool operator==(const Standardization&) const = default;
};

struct Standardized {
  LabeledDataset train;
  std::vector<LabeledDataset> others;
  Standardization record;
};

Standardized standardize(const LabeledDataset& train, const std::vector<LabeledDataset>& others);

/// Scene directories of the form <root>/<scene_id>/{ref,test,mask}.png.
struct SceneFiles {
  std::string id;
  std::filesystem::path reference;
  std::filesystem::path test;
  std::filesystem::path mask;
};

/// Scenes under `root`, sorted by id. Directories missing any of the three
/// files are skipped.
std::vector<SceneFiles> list_scenes(const std::filesystem::path& root);

/// Loads a scene and returns its labeled patterns (coords are pixel positions).
LabeledDataset load_scene_patterns(const std::filesystem::path& reference_path,
                                   const std::filesystem::path& test_path,
                                   const std::filesystem::path& mask_path);

}  // namespace broadcd::imagery
