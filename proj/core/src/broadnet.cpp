#include "broadcd/broadnet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "broadcd/error.hpp"
#include "broadcd/eval.hpp"
#include "broadcd/seed.hpp"

namespace broadcd::broadnet {
namespace {

constexpr std::uint64_t kFoldStream = 0xF01D;
constexpr std::uint64_t kLayerStream = 0x1A7E;

Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

}  // namespace

void validate(const BroadNetConfig& cfg) {
  if (cfg.max_layers < 1) throw Error(ErrorCode::InvalidArgument, "max layers must be >= 1");
  if (!(cfg.compression > 0.0 && cfg.compression <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "compression must lie in (0,1]");
  }
  if (cfg.first_layer_width < 1) throw Error(ErrorCode::InvalidArgument, "first layer width must be >= 1");
  if (!(cfg.afs_epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "AFS epsilon must be > 0");
  if (cfg.cv_folds < 2) throw Error(ErrorCode::InvalidArgument, "cross-validation needs >= 2 folds");
  if (!(cfg.ridge_lambda >= 0.0) || !std::isfinite(cfg.ridge_lambda)) {
    throw Error(ErrorCode::InvalidArgument, "ridge lambda must be finite and >= 0");
  }
  linalg::validate(cfg.autoencoder);
}

std::vector<std::size_t> layer_widths(std::size_t first_layer_width, double compression,
                                      std::size_t layers) {
  std::vector<std::size_t> widths;
  widths.reserve(layers);
  for (std::size_t k = 0; k < layers; ++k) {
    if (k == 0) {
      widths.push_back(first_layer_width);
    } else {
      const auto next = static_cast<std::size_t>(std::floor(compression * static_cast<double>(widths.back())));
      widths.push_back(std::max<std::size_t>(1, next));
    }
  }
  return widths;
}

bool should_stop(std::span<const double> trace, double epsilon) noexcept {
  if (trace.size() < 2) return false;
  return trace[trace.size() - 1] - trace[trace.size() - 2] < epsilon;
}

std::size_t BroadNetModel::feature_width() const noexcept {
  std::size_t w = kPatternWidth;
  for (const Matrix& l : layers) w += static_cast<std::size_t>(l.cols());
  return w;
}

void BroadNetModel::check_structure() const {
  Eigen::Index prev = static_cast<Eigen::Index>(kPatternWidth);
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (layers[k].rows() != prev || layers[k].cols() < 1) {
      throw Error(ErrorCode::FormatError, "enhancement layer " + std::to_string(k + 1) +
                                              " does not chain onto the previous layer");
    }
    prev = layers[k].cols();
  }
  if (output_weights.rows() != static_cast<Eigen::Index>(feature_width()) ||
      output_weights.cols() != static_cast<Eigen::Index>(kClassCount)) {
    throw Error(ErrorCode::FormatError, "output weights do not match the concatenated feature width");
  }
  if (!output_bias.allFinite()) throw Error(ErrorCode::FormatError, "non-finite output bias");
  if (trace.size() != layers.size()) {
    throw Error(ErrorCode::FormatError, "training trace length differs from the layer count");
  }
  for (std::size_t d = 0; d < kPatternWidth; ++d) {
    if (!std::isfinite(input.mean[d]) || !(input.scale[d] > 0.0) || !std::isfinite(input.scale[d])) {
      throw Error(ErrorCode::FormatError, "invalid standardization record");
    }
  }
}

Matrix patterns_matrix(std::span<const Pattern> patterns) {
  Matrix m(static_cast<Eigen::Index>(patterns.size()), static_cast<Eigen::Index>(kPatternWidth));
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    for (std::size_t d = 0; d < kPatternWidth; ++d) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = patterns[i][d];
    }
  }
  return m;
}

Matrix one_hot(std::span<const Label> labels) {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(kClassCount));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= kClassCount) throw Error(ErrorCode::InvalidArgument, "label outside {0,1}");
    y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return y;
}

std::vector<Label> argmax_labels(const Matrix& scores) {
  if (scores.cols() != static_cast<Eigen::Index>(kClassCount)) {
    throw Error(ErrorCode::DimensionMismatch, "score matrix must have two columns");
  }
  std::vector<Label> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = scores(i, 1) > scores(i, 0) ? kChanged : kUnchanged;
  }
  return out;
}

Matrix forward_features(const BroadNetModel& model, const Matrix& x) {
  if (x.cols() != static_cast<Eigen::Index>(kPatternWidth)) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(kPatternWidth) + " input columns, got " + std::to_string(x.cols()));
  }
  Matrix z(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index d = 0; d < x.cols(); ++d) {
      z(i, d) = (x(i, d) - model.input.mean[static_cast<std::size_t>(d)]) / model.input.scale[static_cast<std::size_t>(d)];
    }
  }
  std::vector<Matrix> blocks;
  blocks.reserve(model.layers.size() + 1);
  blocks.push_back(std::move(z));
  for (const Matrix& encoder : model.layers) {
    blocks.push_back(linalg::enhance(blocks.back(), encoder));
  }
  return linalg::concat_columns(blocks);
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const Label> labels, std::size_t folds,
                                                       std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> out(folds);
  Rng rng(seed);
  for (Label label : {kUnchanged, kChanged}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) idx.push_back(i);
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < idx.size(); ++i) out[i % folds].push_back(idx[i]);
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

OutputLayer solve_output_layer(const Matrix& features, std::span<const Label> labels, double ridge_lambda) {
  Matrix augmented(features.rows(), features.cols() + 1);
  augmented.leftCols(features.cols()) = features;
  augmented.col(features.cols()).setOnes();
  const Matrix solved = linalg::ridge_pseudoinverse_solve(augmented, one_hot(labels), ridge_lambda);
  return {solved.topRows(features.cols()), solved.row(features.cols())};
}

Matrix output_scores(const Matrix& features, const Matrix& weights, const Eigen::RowVector2d& bias) {
  Matrix scores = features * weights;
  scores.rowwise() += bias;
  return scores;
}

double cross_validated_afs(const Matrix& features, std::span<const Label> labels,
                           const std::vector<std::vector<std::size_t>>& folds, double ridge_lambda) {
  double total = 0.0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train_rows;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::vector<Label> train_labels;
    train_labels.reserve(train_rows.size());
    for (std::size_t r : train_rows) train_labels.push_back(labels[r]);
    const OutputLayer out = solve_output_layer(select_rows(features, train_rows), train_labels, ridge_lambda);
    const std::vector<Label> predicted =
        argmax_labels(output_scores(select_rows(features, folds[f]), out.weights, out.bias));
    std::vector<Label> truth;
    truth.reserve(folds[f].size());
    for (std::size_t r : folds[f]) truth.push_back(labels[r]);
    total += eval::f_scores(eval::confusion(truth, predicted)).afs;
  }
  return total / static_cast<double>(folds.size());
}

BroadNetModel fit(const BroadNetConfig& config, const LabeledDataset& train) {
  validate(config);
  train.validate();
  const std::size_t minority = train.count(kChanged);
  const std::size_t majority = train.count(kUnchanged);
  if (std::min(minority, majority) < config.cv_folds) {
    throw Error(ErrorCode::InsufficientClassSamples,
                "each class needs at least " + std::to_string(config.cv_folds) +
                    " samples for cross-validation (have " + std::to_string(majority) + " unchanged, " +
                    std::to_string(minority) + " changed)");
  }

  BroadNetModel model;
  model.config = config;
  model.input = imagery::Standardization::fit(train);
  const Matrix x = patterns_matrix(model.input.apply(train).patterns);
  const auto folds = stratified_folds(train.labels, config.cv_folds, mix_seed(config.seed, kFoldStream));
  const auto widths = layer_widths(config.first_layer_width, config.compression, config.max_layers);

  std::vector<Matrix> blocks{x};
  Matrix features = x;
  for (std::size_t k = 0; k < config.max_layers; ++k) {
    linalg::SparseAutoencoderConfig ae = config.autoencoder;
    ae.seed = mix_seed(config.seed ^ config.autoencoder.seed, kLayerStream + k);
    const Matrix encoder = linalg::train_sparse_autoencoder(blocks.back(), widths[k], ae).encoder;
    blocks.push_back(linalg::enhance(blocks.back(), encoder));
    model.layers.push_back(encoder);
    features = linalg::concat_columns(blocks);

    model.trace.push_back(cross_validated_afs(features, train.labels, folds, config.ridge_lambda));
    if (should_stop(model.trace, config.afs_epsilon)) break;
  }

  OutputLayer out = solve_output_layer(features, train.labels, config.ridge_lambda);
  model.output_weights = std::move(out.weights);
  model.output_bias = out.bias;
  return model;
}

Prediction predict(const BroadNetModel& model, const Matrix& x) {
  Prediction p;
  p.scores = output_scores(forward_features(model, x), model.output_weights, model.output_bias);
  p.labels = argmax_labels(p.scores);
  return p;
}

Prediction predict(const BroadNetModel& model, std::span<const Pattern> patterns) {
  return predict(model, patterns_matrix(patterns));
}

BroadNetModel with_input_standardization(BroadNetModel model, const imagery::Standardization& first) {
  model.input = model.input.after(first);
  return model;
}

}  // namespace broadcd::broadnet
