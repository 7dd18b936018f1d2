#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace broadcd {

inline constexpr std::size_t kPatternWidth = 9;

/// A 3x3 neighborhood of difference magnitudes, flattened row-major.
using Pattern = std::array<double, kPatternWidth>;

using Label = std::uint8_t;
inline constexpr Label kUnchanged = 0;
inline constexpr Label kChanged = 1;

struct PixelCoord {
  std::size_t x = 0;
  std::size_t y = 0;
  bool operator==(const PixelCoord&) const = default;
};

/// Patterns with binary labels. `coords` is either empty or parallel to
/// `patterns`; rows synthesized by interpolation carry no coordinate.
struct LabeledDataset {
  std::vector<Pattern> patterns;
  std::vector<Label> labels;
  std::vector<PixelCoord> coords;

  std::size_t size() const noexcept { return patterns.size(); }
  bool empty() const noexcept { return patterns.empty(); }
  bool has_coords() const noexcept { return !coords.empty(); }

  std::size_t count(Label label) const noexcept;
  std::vector<std::size_t> indices_of(Label label) const;

  /// Throws Error(DimensionMismatch / InvalidArgument) if the row vectors
  /// disagree in length or a label is outside {0,1}.
  void validate() const;

  bool operator==(const LabeledDataset&) const = default;
};

/// Rows `rows` of `data`, in the given order.
LabeledDataset subset(const LabeledDataset& data, std::span<const std::size_t> rows);

/// Row-wise concatenation. Coordinates survive only if both inputs have them.
LabeledDataset concatenate(const LabeledDataset& a, const LabeledDataset& b);

}  // namespace broadcd
