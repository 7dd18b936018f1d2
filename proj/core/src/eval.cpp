#include "broadcd/eval.hpp"

#include <cstdio>

#include "broadcd/error.hpp"

namespace broadcd::eval {
namespace {

double ratio_or_zero(std::uint64_t num, std::uint64_t den) noexcept {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double f_score(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) noexcept {
  const double precision = ratio_or_zero(tp, tp + fp);
  const double recall = ratio_or_zero(tp, tp + fn);
  if (precision + recall == 0.0) return 0.0;
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

ConfusionCounts confusion(std::span<const Label> truth, std::span<const Label> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(truth.size()) + " truth labels but " +
                                               std::to_string(predicted.size()) + " predictions");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == kChanged;
    const bool p = predicted[i] == kChanged;
    if (t && p) ++c.tp;
    else if (!t && p) ++c.fp;
    else if (t && !p) ++c.fn;
    else ++c.tn;
  }
  return c;
}

FScores f_scores(const ConfusionCounts& c) noexcept {
  FScores s;
  s.f1 = f_score(c.tp, c.fp, c.fn);
  // Class 0 as positive: its true positives are tn, false positives fn.
  s.f0 = f_score(c.tn, c.fn, c.fp);
  s.afs = (s.f0 + s.f1) / 2.0;
  return s;
}

EvaluationReport make_report(const ConfusionCounts& counts, RunMetadata metadata) {
  return {counts, f_scores(counts), std::move(metadata), std::nullopt};
}

EvaluationReport make_error_report(RunMetadata metadata, std::string error) {
  return {{}, {}, std::move(metadata), std::move(error)};
}

GrayImage render_change_map(std::span<const Label> labels, std::size_t width, std::size_t height) {
  if (labels.size() != width * height) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(labels.size()) + " labels for a " +
                                                  std::to_string(width) + "x" + std::to_string(height) +
                                                  " map");
  }
  GrayImage map(width, height, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kChanged) map.pixels[i] = 255;
  }
  return map;
}

std::string sweep_row(const EvaluationReport& row, bool error_column) {
  const RunMetadata& m = row.metadata;
  std::string line = csv_field(m.strategy) + "," + csv_field(m.ratio) + "," + std::to_string(m.layers) + "," +
                     fixed2(m.compression) + ",";
  if (row.error && error_column) {
    line += ",,";
  } else {
    line += fixed2(row.scores.afs) + "," + fixed2(row.scores.f0) + "," + fixed2(row.scores.f1);
  }
  if (error_column) line += "," + csv_field(row.error.value_or(""));
  return line;
}

std::string sweep_report(std::span<const EvaluationReport> rows, bool error_column) {
  std::string out(kSweepHeader);
  if (error_column) out += ",error";
  out += "\n";
  for (const EvaluationReport& r : rows) out += sweep_row(r, error_column) + "\n";
  return out;
}

}  // namespace broadcd::eval
