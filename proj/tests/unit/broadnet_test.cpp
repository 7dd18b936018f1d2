#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "broadcd/broadnet.hpp"
#include "broadcd/eval.hpp"
#include "support/oracles.hpp"
#include "test_util.hpp"

using namespace broadcd;
using namespace broadcd::broadnet;

namespace {

BroadNetConfig small_config(std::size_t layers = 3) {
  BroadNetConfig cfg;
  cfg.max_layers = layers;
  cfg.autoencoder.max_iterations = 30;
  cfg.seed = 17;
  return cfg;
}

double training_afs(const BroadNetModel& model, const LabeledDataset& data) {
  const Prediction p = predict(model, data.patterns);
  return eval::f_scores(eval::confusion(data.labels, p.labels)).afs;
}

double sse(const Matrix& features, const LabeledDataset& data, double lambda) {
  const OutputLayer out = solve_output_layer(features, data.labels, lambda);
  return (output_scores(features, out.weights, out.bias) - one_hot(data.labels)).squaredNorm();
}

BroadNetModel truncated(const BroadNetModel& m, std::size_t layers) {
  BroadNetModel t = m;
  t.layers.resize(layers);
  return t;
}

}  // namespace

TEST(LayerWidths, CompressionChain) {
  EXPECT_EQ(layer_widths(8, 0.9, 3), (std::vector<std::size_t>{8, 7, 6}));
  EXPECT_EQ(layer_widths(100, 0.9, 2), (std::vector<std::size_t>{100, 90}));
  EXPECT_EQ(layer_widths(3, 0.1, 4), (std::vector<std::size_t>{3, 1, 1, 1}));
  EXPECT_EQ(layer_widths(5, 1.0, 3), (std::vector<std::size_t>{5, 5, 5}));
}

TEST(ShouldStop, IncrementRule) {
  const double t1[] = {80.0, 80.05};
  EXPECT_TRUE(should_stop(t1, 0.1));
  const double t2[] = {80.0, 81.0};
  EXPECT_FALSE(should_stop(t2, 0.5));
  const double t3[] = {80.0};
  EXPECT_FALSE(should_stop(t3, 0.5));
  const double t4[] = {90.0, 85.0};
  EXPECT_TRUE(should_stop(t4, 0.5));
}

TEST(Config, ValidationRejectsOutOfRange) {
  auto bad = [](auto mutate) {
    BroadNetConfig cfg;
    mutate(cfg);
    EXPECT_ERROR_CODE(validate(cfg), InvalidArgument);
  };
  bad([](BroadNetConfig& c) { c.max_layers = 0; });
  bad([](BroadNetConfig& c) { c.compression = 0.0; });
  bad([](BroadNetConfig& c) { c.compression = 1.5; });
  bad([](BroadNetConfig& c) { c.first_layer_width = 0; });
  bad([](BroadNetConfig& c) { c.afs_epsilon = 0.0; });
  bad([](BroadNetConfig& c) { c.cv_folds = 1; });
  bad([](BroadNetConfig& c) { c.ridge_lambda = -1.0; });
  EXPECT_NO_THROW(validate(BroadNetConfig{}));
}

TEST(Argmax, TiesGoToUnchanged) {
  Matrix s(3, 2);
  s << 0.9, 0.1, 0.5, 0.5, 0.2, 0.3;
  EXPECT_EQ(argmax_labels(s), (std::vector<Label>{0, 0, 1}));
}

TEST(OneHot, RowsSumToOne) {
  const std::vector<Label> labels{0, 1, 1, 0, 1};
  const Matrix y = one_hot(labels);
  EXPECT_EQ(y.sum(), 5.0);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    EXPECT_EQ(y.row(i).sum(), 1.0);
    EXPECT_EQ(y(i, labels[i]), 1.0);
  }
}

TEST(ForwardFeatures, ZeroLayersIsStandardizedInput) {
  BroadNetModel m;
  for (std::size_t d = 0; d < kPatternWidth; ++d) {
    m.input.mean[d] = d;
    m.input.scale[d] = 2.0;
  }
  Matrix x = Matrix::Constant(2, 9, 4.0);
  const Matrix f = forward_features(m, x);
  ASSERT_EQ(f.cols(), 9);
  for (Eigen::Index d = 0; d < 9; ++d) EXPECT_DOUBLE_EQ(f(0, d), (4.0 - d) / 2.0);
}

TEST(ForwardFeatures, WrongWidthIsRejected) {
  EXPECT_ERROR_CODE(forward_features(BroadNetModel{}, Matrix::Ones(2, 8)), DimensionMismatch);
}

TEST(Fit, ThreeLayerWidthsAndStructure) {
  BroadNetConfig cfg = small_config(3);
  cfg.afs_epsilon = 1e-300;  // only an exactly flat trace stops early
  const LabeledDataset data = oracle::two_gaussians(80, 1.5, 3);
  const BroadNetModel m = fit(cfg, data);
  EXPECT_NO_THROW(m.check_structure());
  EXPECT_EQ(m.trace.size(), m.layers.size());
  EXPECT_EQ(static_cast<std::size_t>(m.output_weights.rows()), m.feature_width());
  if (m.layers.size() == 3) {
    EXPECT_EQ(m.feature_width(), 30u);
    EXPECT_EQ(forward_features(m, patterns_matrix(data.patterns)).cols(), 30);
  }
  const std::vector<std::size_t> widths = layer_widths(cfg.first_layer_width, cfg.compression, m.layers.size());
  for (std::size_t k = 0; k < m.layers.size(); ++k) {
    EXPECT_EQ(static_cast<std::size_t>(m.layers[k].cols()), widths[k]);
    EXPECT_EQ(m.layers[k].rows(), k == 0 ? 9 : m.layers[k - 1].cols());
  }
}

TEST(Fit, NeverExceedsMaxLayersAndEarlyStopsFollowRule) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    BroadNetConfig cfg = small_config(5);
    cfg.seed = seed;
    const BroadNetModel m = fit(cfg, oracle::two_gaussians(60, 1.0, seed));
    EXPECT_LE(m.layers.size(), 5u);
    EXPECT_GE(m.layers.size(), 1u);
    if (m.layers.size() < 5) {
      ASSERT_GE(m.trace.size(), 2u);
      EXPECT_LT(m.trace.back() - m.trace[m.trace.size() - 2], cfg.afs_epsilon);
    }
  }
}

TEST(Fit, SeparableDataIsLearned) {
  const LabeledDataset data = oracle::two_gaussians(150, 12.0, 8);

  // Direct ridge solve on the standardized input block plus intercept.
  const imagery::Standardization st = imagery::Standardization::fit(data);
  oracle::Dense a, y;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Pattern p = st.apply(data.patterns[i]);
    std::vector<double> row(p.begin(), p.end());
    row.push_back(1.0);
    a.push_back(row);
    y.push_back({data.labels[i] == 0 ? 1.0 : 0.0, data.labels[i] == 1 ? 1.0 : 0.0});
  }
  const oracle::Dense w = oracle::normal_equations(a, y, 1e-6);
  std::vector<Label> direct;
  for (const auto& row : a) {
    double s0 = 0, s1 = 0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      s0 += row[k] * w[k][0];
      s1 += row[k] * w[k][1];
    }
    direct.push_back(s1 > s0 ? 1 : 0);
  }
  ASSERT_EQ(oracle::f_scores(data.labels, direct).afs, 100.0);

  const BroadNetModel m = fit(small_config(3), data);
  EXPECT_GE(m.trace.front(), 99.0);
  const double afs = training_afs(m, data);
  EXPECT_GE(afs, 99.0);
  EXPECT_NEAR(afs, m.trace.back(), 1e-9);
}

TEST(Fit, AddingLayersNeverRaisesTrainingError) {
  BroadNetConfig cfg = small_config(5);
  cfg.afs_epsilon = 1e-300;
  const LabeledDataset data = oracle::two_gaussians(100, 1.0, 21);
  const BroadNetModel m = fit(cfg, data);
  const Matrix x = patterns_matrix(data.patterns);
  double prev = sse(forward_features(truncated(m, 0), x), data, 0.0);
  for (std::size_t k = 1; k <= m.layers.size(); ++k) {
    const double cur = sse(forward_features(truncated(m, k), x), data, 0.0);
    EXPECT_LE(cur, prev + 1e-9) << "layer " << k;
    prev = cur;
  }
}

TEST(Fit, Deterministic) {
  const LabeledDataset data = oracle::two_gaussians(70, 2.0, 4);
  const BroadNetModel a = fit(small_config(), data), b = fit(small_config(), data);
  EXPECT_EQ(a.trace, b.trace);
  ASSERT_EQ(a.layers.size(), b.layers.size());
  for (std::size_t k = 0; k < a.layers.size(); ++k) EXPECT_EQ(a.layers[k], b.layers[k]);
  EXPECT_EQ(a.output_weights, b.output_weights);
  EXPECT_EQ(to_json(a), to_json(b));
  const Matrix x = patterns_matrix(data.patterns);
  EXPECT_EQ(forward_features(a, x), forward_features(a, x));
}

TEST(Fit, TooFewClassSamplesForFolds) {
  LabeledDataset data = oracle::two_gaussians(10, 3.0, 1);
  data.patterns.resize(12);
  data.labels.resize(12);  // 10 unchanged, 2 changed
  EXPECT_ERROR_CODE(fit(small_config(), data), InsufficientClassSamples);
}

TEST(StratifiedFolds, BalancedAndComplete) {
  std::vector<Label> labels(31, 0);
  for (std::size_t i = 0; i < 10; ++i) labels[i * 3] = 1;
  const auto folds = stratified_folds(labels, 3, 5);
  std::vector<int> seen(labels.size(), 0);
  for (const auto& f : folds) {
    std::size_t ones = 0;
    for (std::size_t i : f) {
      ++seen[i];
      ones += labels[i];
    }
    EXPECT_GE(ones, 3u);
    EXPECT_LE(ones, 4u);
  }
  for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(Predict, ScoresAreLinearInFeatures) {
  const LabeledDataset data = oracle::two_gaussians(60, 3.0, 5);
  const BroadNetModel m = fit(small_config(2), data);
  const Matrix x = patterns_matrix(data.patterns);
  const Prediction p = predict(m, x);
  Matrix want = forward_features(m, x) * m.output_weights;
  want.rowwise() += m.output_bias;
  EXPECT_TRUE(p.scores.isApprox(want, 1e-14));
  EXPECT_EQ(p.labels, argmax_labels(p.scores));
}

TEST(WithInputStandardization, MatchesPrestandardizedPrediction) {
  const LabeledDataset raw = oracle::two_gaussians(50, 3.0, 6);
  const imagery::Standardization first = imagery::Standardization::fit(raw);
  const BroadNetModel m = fit(small_config(2), first.apply(raw));
  const BroadNetModel folded = with_input_standardization(m, first);
  const Prediction a = predict(m, first.apply(raw).patterns);
  const Prediction b = predict(folded, raw.patterns);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_TRUE(a.scores.isApprox(b.scores, 1e-9));
}

TEST(ModelIo, RoundTripIsBitIdentical) {
  const auto dir = testutil::scratch_dir();
  const LabeledDataset data = oracle::two_gaussians(60, 2.0, 7);
  const BroadNetModel m = fit(small_config(3), data);
  save_model(m, dir / "m.json");
  const BroadNetModel back = load_model(dir / "m.json");
  EXPECT_EQ(back.config, m.config);
  EXPECT_EQ(back.input, m.input);
  EXPECT_EQ(back.trace, m.trace);
  EXPECT_EQ(back.output_weights, m.output_weights);
  EXPECT_EQ(back.output_bias, m.output_bias);
  const Prediction a = predict(m, data.patterns), b = predict(back, data.patterns);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.scores, b.scores);
  EXPECT_EQ(to_json(back), to_json(m));
}

TEST(ModelIo, DocumentLayout) {
  const BroadNetModel m = fit(small_config(1), oracle::two_gaussians(30, 2.0, 1));
  const std::string text = to_json(m);
  for (const char* key : {"\"version\"", "\"config\"", "\"mean\"", "\"std\"", "\"layers\"", "\"output_weights\"",
                          "\"output_bias\"", "\"trace\"", "\"rows\"", "\"cols\"", "\"data\""})
    EXPECT_NE(text.find(key), std::string::npos) << key;
}

TEST(ModelIo, TruncatedFileIsFormatError) {
  const auto dir = testutil::scratch_dir();
  const std::string text = to_json(fit(small_config(1), oracle::two_gaussians(30, 2.0, 1)));
  testutil::write_text(dir / "t.json", text.substr(0, text.size() / 2));
  EXPECT_ERROR_CODE(load_model(dir / "t.json"), FormatError);
}

TEST(ModelIo, UnknownVersion) {
  std::string text = to_json(fit(small_config(1), oracle::two_gaussians(30, 2.0, 1)));
  const auto pos = text.find("\"version\": 1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 12, "\"version\": 99");
  EXPECT_ERROR_CODE(from_json(text), VersionMismatch);
}

TEST(ModelIo, StructuralDamageIsFormatError) {
  EXPECT_ERROR_CODE(from_json("{}"), FormatError);
  EXPECT_ERROR_CODE(from_json("[1,2,3]"), FormatError);
  std::string text = to_json(fit(small_config(2), oracle::two_gaussians(30, 2.0, 1)));
  const auto pos = text.find("\"trace\"");
  ASSERT_NE(pos, std::string::npos);
  text = text.substr(0, pos) + "\"trace\": []\n}\n";
  EXPECT_ERROR_CODE(from_json(text), FormatError);
}

TEST(ModelIo, MissingFile) {
  EXPECT_THROW(load_model("/nonexistent/model.json"), Error);
}
