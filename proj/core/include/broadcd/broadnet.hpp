#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "broadcd/dataset.hpp"
#include "broadcd/imagery.hpp"
#include "broadcd/linalg.hpp"

namespace broadcd::broadnet {

using linalg::Matrix;

inline constexpr std::size_t kClassCount = 2;

struct BroadNetConfig {
  std::size_t max_layers = 5;
  double compression = 0.9;
  std::size_t first_layer_width = 8;
  double afs_epsilon = 0.5;  // AFS points on the 0-100 scale
  std::size_t cv_folds = 3;
  double ridge_lambda = linalg::kDefaultRidge;
  linalg::SparseAutoencoderConfig autoencoder;
  std::uint64_t seed = 0;

  bool operator==(const BroadNetConfig& o) const {
    return max_layers == o.max_layers && compression == o.compression &&
           first_layer_width == o.first_layer_width && afs_epsilon == o.afs_epsilon &&
           cv_folds == o.cv_folds && ridge_lambda == o.ridge_lambda &&
           autoencoder.l1_weight == o.autoencoder.l1_weight &&
           autoencoder.max_iterations == o.autoencoder.max_iterations &&
           autoencoder.step_tolerance == o.autoencoder.step_tolerance &&
           autoencoder.seed == o.autoencoder.seed && seed == o.seed;
  }
};

void validate(const BroadNetConfig& cfg);

/// w_1 = first_layer_width, w_k = max(1, floor(compression * w_{k-1})).
std::vector<std::size_t> layer_widths(std::size_t first_layer_width, double compression,
                                      std::size_t layers);

/// True when the last increment of the cross-validated AFS trace is below
/// `epsilon`; a trace of fewer than two entries never stops.
bool should_stop(std::span<const double> trace, double epsilon) noexcept;

struct BroadNetModel {
  BroadNetConfig config;
  imagery::Standardization input = imagery::Standardization::identity();
  std::vector<Matrix> layers;  // layer k maps layer k-1 activations
  Matrix output_weights;       // (9 + sum of widths) x 2
  Eigen::RowVector2d output_bias = Eigen::RowVector2d::Zero();
  std::vector<double> trace;   // cross-validated AFS after each layer

  std::size_t feature_width() const noexcept;

  /// Throws Error(FormatError) if the layer chain, output weights or trace
  /// are structurally inconsistent.
  void check_structure() const;
};

struct Prediction {
  std::vector<Label> labels;
  Matrix scores;  // n x 2 raw linear outputs
};

Matrix patterns_matrix(std::span<const Pattern> patterns);

/// Row i has a 1 in column labels[i], 0 elsewhere.
Matrix one_hot(std::span<const Label> labels);

/// Argmax per row; ties go to class 0.
std::vector<Label> argmax_labels(const Matrix& scores);

/// [standardized input | layer 1 | layer 2 | ...] for raw n x 9 input.
Matrix forward_features(const BroadNetModel& model, const Matrix& x);

/// Grows enhancement layers one at a time, scoring each addition by
/// stratified cross-validated AFS, and solves the output weights on the
/// full training set once growth stops.
BroadNetModel fit(const BroadNetConfig& config, const LabeledDataset& train);

struct OutputLayer {
  Matrix weights;  // features.cols() x 2
  Eigen::RowVector2d bias;
};

/// Ridge solve of one-hot targets on [features | 1].
OutputLayer solve_output_layer(const Matrix& features, std::span<const Label> labels, double ridge_lambda);

/// features * weights + bias, per row.
Matrix output_scores(const Matrix& features, const Matrix& weights, const Eigen::RowVector2d& bias);

/// Mean AFS over stratified folds when only the output weights are refit.
double cross_validated_afs(const Matrix& features, std::span<const Label> labels,
                           const std::vector<std::vector<std::size_t>>& folds, double ridge_lambda);

/// Stratified fold membership: each class is shuffled and dealt round-robin.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const Label> labels, std::size_t folds,
                                                       std::uint64_t seed);

Prediction predict(const BroadNetModel& model, const Matrix& x);
Prediction predict(const BroadNetModel& model, std::span<const Pattern> patterns);

/// The equivalent model for inputs that have not yet gone through `first`.
BroadNetModel with_input_standardization(BroadNetModel model, const imagery::Standardization& first);

inline constexpr int kModelFormatVersion = 1;

std::string to_json(const BroadNetModel& model);
/// Throws Error(FormatError) on malformed documents and Error(VersionMismatch)
/// on an unknown format version.
BroadNetModel from_json(std::string_view text);

void save_model(const BroadNetModel& model, const std::filesystem::path& path);
BroadNetModel load_model(const std::filesystem::path& path);

}  // namespace broadcd::broadnet
