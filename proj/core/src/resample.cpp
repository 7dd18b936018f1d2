#include "broadcd/resample.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "broadcd/error.hpp"
#include "broadcd/seed.hpp"

namespace broadcd::resample {
namespace {

std::string class_name(Label label) { return "class " + std::to_string(label); }

double squared_distance(const Pattern& a, const Pattern& b) noexcept {
  double s = 0.0;
  for (std::size_t d = 0; d < kPatternWidth; ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

void append_row(LabeledDataset& out, const Pattern& p, Label label) {
  out.patterns.push_back(p);
  out.labels.push_back(label);
}

std::uint64_t parse_part(std::string_view text, std::string_view whole) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::InvalidArgument, "malformed imbalance ratio '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

ImbalanceRatio::ImbalanceRatio(std::uint64_t majority_parts, std::uint64_t minority_parts) {
  if (majority_parts == 0 || minority_parts == 0) {
    throw Error(ErrorCode::InvalidArgument, "imbalance ratio parts must be >= 1");
  }
  const std::uint64_t g = std::gcd(majority_parts, minority_parts);
  majority_ = majority_parts / g;
  minority_ = minority_parts / g;
}

ImbalanceRatio ImbalanceRatio::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument, "imbalance ratio '" + std::string(text) + "' is not of the form A:B");
  }
  return ImbalanceRatio(parse_part(text.substr(0, colon), text), parse_part(text.substr(colon + 1), text));
}

std::string ImbalanceRatio::to_string() const {
  return std::to_string(majority_) + ":" + std::to_string(minority_);
}

ResampleStrategy ResampleStrategy::parse(std::string_view name, std::size_t smote_k) {
  if (smote_k < 1) throw Error(ErrorCode::InvalidArgument, "smote k must be >= 1");
  if (name == "smote") return {OverSampler::Smote, smote_k};
  if (name == "randover") return {OverSampler::RandomOver, smote_k};
  throw Error(ErrorCode::InvalidArgument,
              "unknown strategy '" + std::string(name) + "' (expected randover or smote)");
}

std::string_view ResampleStrategy::name() const noexcept {
  return over == OverSampler::Smote ? "smote" : "randover";
}

LabeledDataset random_undersample(const LabeledDataset& data, Label class_label,
                                  std::size_t target_count, std::uint64_t seed) {
  data.validate();
  std::vector<std::size_t> idx = data.indices_of(class_label);
  if (target_count > idx.size()) {
    throw Error(ErrorCode::TargetExceedsAvailable,
                "asked to keep " + std::to_string(target_count) + " rows of " + class_name(class_label) +
                    " but only " + std::to_string(idx.size()) + " exist");
  }
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<bool> keep(data.size(), true);
  for (std::size_t i = target_count; i < idx.size(); ++i) keep[idx[i]] = false;

  std::vector<std::size_t> rows;
  rows.reserve(data.size() - (idx.size() - target_count));
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (keep[i]) rows.push_back(i);
  }
  return subset(data, rows);
}

LabeledDataset random_oversample(const LabeledDataset& data, Label class_label,
                                 std::size_t target_count, std::uint64_t seed) {
  data.validate();
  const std::vector<std::size_t> idx = data.indices_of(class_label);
  if (idx.empty()) {
    throw Error(ErrorCode::EmptyClass, class_name(class_label) + " has no samples to duplicate");
  }
  if (target_count < idx.size()) {
    throw Error(ErrorCode::InvalidArgument, "oversampling target below current class count");
  }
  LabeledDataset out = data;
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);
  for (std::size_t n = idx.size(); n < target_count; ++n) {
    const std::size_t src = idx[pick(rng)];
    out.patterns.push_back(data.patterns[src]);
    out.labels.push_back(class_label);
    if (out.has_coords()) out.coords.push_back(data.coords[src]);
  }
  return out;
}

std::vector<std::vector<std::size_t>> nearest_neighbors(const std::vector<Pattern>& points,
                                                        std::size_t k) {
  const std::size_t n = points.size();
  k = std::min(k, n == 0 ? 0 : n - 1);
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist.emplace_back(squared_distance(points[i], points[j]), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    out[i].reserve(k);
    for (std::size_t m = 0; m < k; ++m) out[i].push_back(dist[m].second);
  }
  return out;
}

LabeledDataset smote(const LabeledDataset& data, Label class_label, std::size_t target_count,
                     std::size_t k, std::uint64_t seed) {
  data.validate();
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "smote k must be >= 1");
  const std::vector<std::size_t> idx = data.indices_of(class_label);
  if (idx.empty()) {
    throw Error(ErrorCode::EmptyClass, class_name(class_label) + " has no samples to interpolate");
  }
  if (target_count < idx.size()) {
    throw Error(ErrorCode::InvalidArgument, "SMOTE target below current class count");
  }
  if (target_count == idx.size()) return data;
  if (idx.size() < 2) {
    throw Error(ErrorCode::SingletonClass,
                class_name(class_label) + " has a single sample; SMOTE needs two to interpolate");
  }

  std::vector<Pattern> members;
  members.reserve(idx.size());
  for (std::size_t i : idx) members.push_back(data.patterns[i]);
  const auto neighbors = nearest_neighbors(members, k);
  const std::size_t k_eff = neighbors.front().size();

  LabeledDataset out = data;
  out.coords.clear();
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick_anchor(0, members.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_neighbor(0, k_eff - 1);
  for (std::size_t n = idx.size(); n < target_count; ++n) {
    const std::size_t a = pick_anchor(rng);
    const std::size_t b = neighbors[a][pick_neighbor(rng)];
    const double t = uniform_closed01(rng);
    Pattern s{};
    for (std::size_t d = 0; d < kPatternWidth; ++d) {
      s[d] = members[a][d] + t * (members[b][d] - members[a][d]);
    }
    append_row(out, s, class_label);
  }
  return out;
}

LabeledDataset rebalance(const LabeledDataset& data, const ImbalanceRatio& ratio,
                         const ResampleStrategy& strategy, std::size_t minority_target,
                         std::uint64_t seed) {
  data.validate();
  const std::size_t minority = data.count(kChanged);
  const std::size_t majority = data.count(kUnchanged);
  if (minority == 0) throw Error(ErrorCode::EmptyClass, "no changed (minority) samples");
  if (majority == 0) throw Error(ErrorCode::EmptyClass, "no unchanged (majority) samples");
  if (minority_target < 2) {
    throw Error(ErrorCode::InvalidArgument, "minority target must be >= 2");
  }

  const std::size_t m = std::max(minority_target, minority);
  const std::uint64_t wanted_majority = m * ratio.majority_parts() / ratio.minority_parts();
  if (wanted_majority > majority) {
    throw Error(ErrorCode::InsufficientMajority,
                "ratio " + ratio.to_string() + " with " + std::to_string(m) + " minority samples needs " +
                    std::to_string(wanted_majority) + " majority samples but only " +
                    std::to_string(majority) + " are available");
  }

  const std::uint64_t over_seed = mix_seed(seed, 1);
  const std::uint64_t under_seed = mix_seed(seed, 2);
  LabeledDataset grown = strategy.over == OverSampler::Smote
                             ? smote(data, kChanged, m, strategy.smote_k, over_seed)
                             : random_oversample(data, kChanged, m, over_seed);
  return random_undersample(grown, kUnchanged, static_cast<std::size_t>(wanted_majority), under_seed);
}

LabeledDataset undersample_to_ratio(const LabeledDataset& data, const ImbalanceRatio& ratio,
                                    std::uint64_t seed) {
  data.validate();
  const std::size_t minority = data.count(kChanged);
  const std::size_t majority = data.count(kUnchanged);
  if (minority == 0) throw Error(ErrorCode::EmptyClass, "no changed (minority) samples");
  if (majority == 0) throw Error(ErrorCode::EmptyClass, "no unchanged (majority) samples");
  const std::uint64_t want_majority = minority * ratio.majority_parts() / ratio.minority_parts();
  if (want_majority >= 1 && want_majority <= majority) {
    return random_undersample(data, kUnchanged, static_cast<std::size_t>(want_majority), seed);
  }
  const std::uint64_t want_minority =
      std::max<std::uint64_t>(1, majority * ratio.minority_parts() / ratio.majority_parts());
  LabeledDataset out =
      random_undersample(data, kChanged, static_cast<std::size_t>(std::min<std::uint64_t>(want_minority, minority)), seed);
  const std::uint64_t fit_majority =
      std::min<std::uint64_t>(majority, out.count(kChanged) * ratio.majority_parts() / ratio.minority_parts());
  return random_undersample(out, kUnchanged, static_cast<std::size_t>(std::max<std::uint64_t>(1, fit_majority)),
                            mix_seed(seed, 1));
}

}  // namespace broadcd::resample
