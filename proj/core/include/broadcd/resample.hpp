#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "broadcd/dataset.hpp"

namespace broadcd::resample {

/// Majority-to-minority ratio, stored in lowest terms ("10:1").
class ImbalanceRatio {
 public:
  ImbalanceRatio(std::uint64_t majority_parts, std::uint64_t minority_parts);

  /// Parses "A:B"; throws Error(InvalidArgument) on malformed input.
  static ImbalanceRatio parse(std::string_view text);

  std::uint64_t majority_parts() const noexcept { return majority_; }
  std::uint64_t minority_parts() const noexcept { return minority_; }
  std::string to_string() const;

  bool operator==(const ImbalanceRatio&) const = default;

 private:
  std::uint64_t majority_;
  std::uint64_t minority_;
};

enum class OverSampler { RandomOver, Smote };

struct ResampleStrategy {
  OverSampler over = OverSampler::Smote;
  std::size_t smote_k = 5;

  /// "randover" or "smote".
  static ResampleStrategy parse(std::string_view name, std::size_t smote_k = 5);
  std::string_view name() const noexcept;
};

/// Keeps a seeded uniform subset of `target_count` rows of `class_label`.
/// Surviving rows keep their original order.
LabeledDataset random_undersample(const LabeledDataset& data, Label class_label,
                                  std::size_t target_count, std::uint64_t seed);

/// Appends seeded with-replacement duplicates of `class_label` rows.
LabeledDataset random_oversample(const LabeledDataset& data, Label class_label,
                                 std::size_t target_count, std::uint64_t seed);

/// Appends interpolants x + t (x' - x), x' among the k nearest same-class
/// neighbors of x (k clamped to class size - 1). Synthetic rows drop coords.
LabeledDataset smote(const LabeledDataset& data, Label class_label, std::size_t target_count,
                     std::size_t k, std::uint64_t seed);

/// The k nearest neighbors (Euclidean, ties by index) of every row of
/// `points` among the others. Exposed for tests and tooling.
std::vector<std::vector<std::size_t>> nearest_neighbors(const std::vector<Pattern>& points,
                                                        std::size_t k);

/// Grows the changed class (label 1) to max(minority_target, its count) and
/// undersamples the unchanged class to floor(m * majority / minority).
LabeledDataset rebalance(const LabeledDataset& data, const ImbalanceRatio& ratio,
                         const ResampleStrategy& strategy, std::size_t minority_target,
                         std::uint64_t seed);

/// Random undersampling only: shrinks the unchanged class to
/// floor(minority * majority_parts / minority_parts), or, if too few
/// unchanged rows exist, shrinks the changed class instead. Used to build
/// held-out sets at a given ratio without synthetic rows.
LabeledDataset undersample_to_ratio(const LabeledDataset& data, const ImbalanceRatio& ratio,
                                    std::uint64_t seed);

}  // namespace broadcd::resample
