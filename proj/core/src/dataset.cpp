#include "broadcd/dataset.hpp"

#include <algorithm>
#include <string>

#include "broadcd/error.hpp"

namespace broadcd {

std::size_t LabeledDataset::count(Label label) const noexcept {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

std::vector<std::size_t> LabeledDataset::indices_of(Label label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) out.push_back(i);
  }
  return out;
}

void LabeledDataset::validate() const {
  if (labels.size() != patterns.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(patterns.size()) + " patterns but " + std::to_string(labels.size()) +
                    " labels");
  }
  if (!coords.empty() && coords.size() != patterns.size()) {
    throw Error(ErrorCode::DimensionMismatch, "coordinate count does not match pattern count");
  }
  for (Label l : labels) {
    if (l != kUnchanged && l != kChanged) {
      throw Error(ErrorCode::InvalidArgument, "label outside {0,1}: " + std::to_string(l));
    }
  }
}

LabeledDataset subset(const LabeledDataset& data, std::span<const std::size_t> rows) {
  LabeledDataset out;
  out.patterns.reserve(rows.size());
  out.labels.reserve(rows.size());
  if (data.has_coords()) out.coords.reserve(rows.size());
  for (std::size_t r : rows) {
    out.patterns.push_back(data.patterns.at(r));
    out.labels.push_back(data.labels.at(r));
    if (data.has_coords()) out.coords.push_back(data.coords.at(r));
  }
  return out;
}

LabeledDataset concatenate(const LabeledDataset& a, const LabeledDataset& b) {
  LabeledDataset out = a;
  out.patterns.insert(out.patterns.end(), b.patterns.begin(), b.patterns.end());
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  const bool keep = (a.has_coords() || a.empty()) && (b.has_coords() || b.empty());
  if (keep) {
    out.coords.insert(out.coords.end(), b.coords.begin(), b.coords.end());
  } else {
    out.coords.clear();
  }
  return out;
}

}  // namespace broadcd
