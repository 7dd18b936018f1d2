#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "broadcd/dataset.hpp"
#include "broadcd/raster.hpp"

namespace broadcd::eval {

/// Confusion counts with the changed class (1) as positive.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// Percentages on the 0-100 scale; afs is the unweighted mean of f0 and f1.
struct FScores {
  double f0 = 0.0;
  double f1 = 0.0;
  double afs = 0.0;
};

/// Throws Error(LengthMismatch) when the vectors differ in length.
ConfusionCounts confusion(std::span<const Label> truth, std::span<const Label> predicted);

/// Per-class F-score 100 * 2PR / (P + R); any 0/0 evaluates to 0.
FScores f_scores(const ConfusionCounts& counts) noexcept;

struct RunMetadata {
  std::string strategy;
  std::string ratio;
  std::size_t layers = 0;
  double compression = 0.0;
};

struct EvaluationReport {
  ConfusionCounts counts;
  FScores scores;
  RunMetadata metadata;
  std::optional<std::string> error;  // set when the run failed; scores are then meaningless
};

EvaluationReport make_report(const ConfusionCounts& counts, RunMetadata metadata);
EvaluationReport make_error_report(RunMetadata metadata, std::string error);

/// White (255) where the label is 1, black elsewhere. Labels are row-major.
GrayImage render_change_map(std::span<const Label> labels, std::size_t width, std::size_t height);

inline constexpr std::string_view kSweepHeader = "strategy,ir,layers,compression,afs,f0,f1";

/// CSV with header `strategy,ir,layers,compression,afs,f0,f1` and one row per
/// report in input order; scores use two decimals. With `error_column` an
/// `error` column is appended and failed runs leave their scores empty.
std::string sweep_report(std::span<const EvaluationReport> rows, bool error_column = false);

/// One CSV line (no trailing newline) in the layout of sweep_report.
std::string sweep_row(const EvaluationReport& row, bool error_column = false);

}  // namespace broadcd::eval
