#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "broadcd/error.hpp"
#include "broadcd/imagery.hpp"
#include "broadcd/png_io.hpp"
#include "broadcd/resample.hpp"
#include "broadcd/seed.hpp"

namespace broadcd::cli {
namespace {

constexpr std::uint64_t kSplitStream = 0x5B117;
constexpr std::uint64_t kHeldoutStream = 0x4E1D;

template <typename F>
auto stage(const std::string& name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw StageError(name, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw StageError(name, e.what());
  }
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void require_file(const fs::path& p, const char* flag) {
  if (p.empty()) throw Error(ErrorCode::InvalidArgument, std::string("missing ") + flag);
  if (!fs::exists(p)) throw Error(ErrorCode::DecodeError, std::string(flag) + " file " + p.string() + " does not exist");
}

LabeledDataset load_patterns(const DataSource& src) {
  return stage("imagery", [&] {
    if (!src.scenes_root.empty()) {
      const auto scenes = imagery::list_scenes(src.scenes_root);
      if (scenes.empty()) {
        throw Error(ErrorCode::InvalidArgument, "no <scene>/{ref,test,mask}.png under " + src.scenes_root.string());
      }
      LabeledDataset pooled;
      for (const auto& s : scenes) {
        pooled = concatenate(pooled, imagery::load_scene_patterns(s.reference, s.test, s.mask));
      }
      return pooled;
    }
    require_file(src.ref, "--ref");
    require_file(src.test, "--test");
    require_file(src.mask, "--mask");
    return imagery::load_scene_patterns(src.ref, src.test, src.mask);
  });
}

imagery::Split split(const LabeledDataset& data, double fraction, std::uint64_t seed) {
  return stage("split", [&] { return imagery::split_dataset(data, fraction, mix_seed(seed, kSplitStream)); });
}

struct Prepared {
  imagery::Split raw;
  imagery::Standardized standardized;  // train + {test}
};

Prepared prepare(const DataSource& src, double fraction, std::uint64_t seed) {
  Prepared p;
  p.raw = split(load_patterns(src), fraction, seed);
  p.standardized = stage("standardize", [&] { return imagery::standardize(p.raw.train, {p.raw.test}); });
  return p;
}

// Rebalance in standardized space, fit, and fold the pre-standardization
// into the model so it accepts raw patterns.
broadnet::BroadNetModel train_cell(const Prepared& prep, const resample::ImbalanceRatio& ratio,
                                   const resample::ResampleStrategy& strategy,
                                   std::optional<std::size_t> minority_target,
                                   const broadnet::BroadNetConfig& net, std::uint64_t seed,
                                   std::size_t* rows_out = nullptr) {
  const LabeledDataset balanced = stage("resample", [&] {
    const std::size_t natural = prep.standardized.train.count(kChanged);
    return resample::rebalance(prep.standardized.train, ratio, strategy, minority_target.value_or(natural), seed);
  });
  if (rows_out) *rows_out = balanced.size();
  auto model = stage("fit", [&] { return broadnet::fit(net, balanced); });
  return broadnet::with_input_standardization(std::move(model), prep.standardized.record);
}

std::vector<Label> predict_labels(const broadnet::BroadNetModel& model, const LabeledDataset& data) {
  return stage("predict", [&] { return broadnet::predict(model, data.patterns).labels; });
}

void append_csv(const fs::path& path, const eval::EvaluationReport& report) {
  stage("output", [&] {
    const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    if (fresh) out << eval::kSweepHeader << "\n";
    out << eval::sweep_row(report) << "\n";
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
  });
}

void write_text(const fs::path& path, const std::string& text) {
  stage("output", [&] {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
  });
}

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

SynthFixture synthesize(const SynthConfig& cfg) {
  if (cfg.width == 0 || cfg.height == 0) throw Error(ErrorCode::GeometryError, "image must be at least 1x1");
  if (cfg.rect_w == 0 || cfg.rect_h == 0) throw Error(ErrorCode::GeometryError, "rectangle must be at least 1x1");
  if (cfg.rect_x + cfg.rect_w > cfg.width || cfg.rect_y + cfg.rect_h > cfg.height) {
    throw Error(ErrorCode::GeometryError, "rectangle " + std::to_string(cfg.rect_w) + "x" +
                                              std::to_string(cfg.rect_h) + " at (" + std::to_string(cfg.rect_x) +
                                              "," + std::to_string(cfg.rect_y) + ") does not fit a " +
                                              std::to_string(cfg.width) + "x" + std::to_string(cfg.height) +
                                              " image");
  }
  if (!(cfg.noise >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise sigma must be >= 0");

  Rng rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  SynthFixture f{RgbImage(cfg.width, cfg.height), RgbImage(cfg.width, cfg.height),
                 GrayImage(cfg.width, cfg.height, 0)};

  std::vector<double> base(cfg.width * cfg.height * 3);
  for (std::size_t y = 0; y < cfg.height; ++y) {
    for (std::size_t x = 0; x < cfg.width; ++x) {
      const double u = static_cast<double>(x) / static_cast<double>(cfg.width);
      const double v = static_cast<double>(y) / static_cast<double>(cfg.height);
      const double color[3] = {90.0 + 40.0 * u, 110.0 + 30.0 * v, 70.0 + 20.0 * u * v};
      std::uint8_t* px = f.reference.at(x, y);
      for (int c = 0; c < 3; ++c) {
        const double value = color[c] + cfg.noise * noise(rng);
        base[(y * cfg.width + x) * 3 + static_cast<std::size_t>(c)] = value;
        px[c] = to_u8(value);
      }
    }
  }
  for (std::size_t y = 0; y < cfg.height; ++y) {
    for (std::size_t x = 0; x < cfg.width; ++x) {
      const bool inside = x >= cfg.rect_x && x < cfg.rect_x + cfg.rect_w && y >= cfg.rect_y &&
                          y < cfg.rect_y + cfg.rect_h;
      std::uint8_t* px = f.test.at(x, y);
      for (int c = 0; c < 3; ++c) {
        const double value = base[(y * cfg.width + x) * 3 + static_cast<std::size_t>(c)] +
                             (inside ? cfg.delta : 0.0) + cfg.noise * noise(rng);
        px[c] = to_u8(value);
      }
      if (inside) f.mask.at(x, y) = 255;
    }
  }
  return f;
}

void write_fixture(const SynthFixture& fixture, const fs::path& dir) {
  stage("output", [&] {
    fs::create_directories(dir);
    png::write(dir / "ref.png", fixture.reference);
    png::write(dir / "test.png", fixture.test);
    png::write(dir / "mask.png", fixture.mask);
  });
}

TrainResult train(const TrainConfig& cfg, std::ostream& log) {
  const auto ratio = stage("config", [&] { return resample::ImbalanceRatio::parse(cfg.ratio); });
  const auto strategy = stage("config", [&] { return resample::ResampleStrategy::parse(cfg.strategy, cfg.smote_k); });
  broadnet::BroadNetConfig net = cfg.net;
  net.seed = cfg.seed;
  stage("config", [&] { broadnet::validate(net); });

  const Prepared prep = prepare(cfg.data, cfg.train_fraction, cfg.seed);
  TrainResult result;
  result.test_rows = prep.raw.test.size();
  result.model = train_cell(prep, ratio, strategy, cfg.minority_target, net, mix_seed(cfg.seed, 1),
                            &result.train_rows);

  const auto widths = broadnet::layer_widths(net.first_layer_width, net.compression, result.model.layers.size());
  for (std::size_t k = 0; k < result.model.trace.size(); ++k) {
    log << "layer " << (k + 1) << " width " << widths[k] << " cv_afs " << fixed(result.model.trace[k]) << "\n";
  }
  if (!cfg.out.empty()) {
    write_text(cfg.out, broadnet::to_json(result.model));
    log << "wrote " << cfg.out.string() << " (" << result.model.layers.size() << " layers, "
        << result.train_rows << " training rows)\n";
  }
  return result;
}

GrayImage predict_map(const PredictConfig& cfg) {
  const auto model = stage("model", [&] {
    if (cfg.model.empty()) throw Error(ErrorCode::InvalidArgument, "missing --model");
    return broadnet::load_model(cfg.model);
  });
  const auto pair = stage("imagery", [&] {
    require_file(cfg.ref, "--ref");
    require_file(cfg.test, "--test");
    return imagery::load_image_pair(cfg.ref, cfg.test);
  });
  const auto diff = stage("imagery", [&] { return imagery::difference_magnitude(pair); });
  const imagery::LabelGrid blank{diff.width, diff.height, std::vector<Label>(diff.values.size(), kUnchanged)};
  const LabeledDataset patterns = stage("imagery", [&] { return imagery::extract_patterns(diff, blank); });
  const auto labels = predict_labels(model, patterns);
  GrayImage map = stage("output", [&] { return eval::render_change_map(labels, diff.width, diff.height); });
  if (!cfg.out.empty()) stage("output", [&] { png::write(cfg.out, map); });
  return map;
}

eval::EvaluationReport evaluate(const EvaluateConfig& cfg, std::ostream& log) {
  eval::RunMetadata meta{cfg.strategy, cfg.ratio, cfg.layers, cfg.compression};
  std::vector<Label> truth;
  std::vector<Label> predicted;

  if (cfg.subset != "all" && cfg.subset != "test" && cfg.subset != "test-matched") {
    throw StageError("config", "--subset must be 'all', 'test' or 'test-matched'");
  }

  if (!cfg.pred.empty()) {
    if (cfg.subset != "all") throw StageError("config", "--subset test requires --model, not --pred");
    const auto mask = stage("imagery", [&] {
      require_file(cfg.mask, "--mask");
      return imagery::binarize_mask(cfg.mask);
    });
    const auto pred = stage("imagery", [&] {
      require_file(cfg.pred, "--pred");
      return imagery::binarize_mask(cfg.pred);
    });
    if (mask.width != pred.width || mask.height != pred.height) {
      throw StageError("evaluate", "LengthMismatch: prediction map and mask differ in size");
    }
    truth = mask.labels;
    predicted = pred.labels;
  } else {
    const auto model = stage("model", [&] {
      if (cfg.model.empty()) throw Error(ErrorCode::InvalidArgument, "need --pred or --model");
      return broadnet::load_model(cfg.model);
    });
    meta.layers = model.config.max_layers;
    meta.compression = model.config.compression;
    LabeledDataset data = load_patterns(DataSource{cfg.ref, cfg.test, cfg.mask, {}});
    if (cfg.subset != "all") data = split(data, cfg.train_fraction, cfg.seed).test;
    if (cfg.subset == "test-matched") data = matched_heldout(data, cfg.ratio, cfg.seed);
    truth = data.labels;
    predicted = predict_labels(model, data);
  }

  const auto report = stage("evaluate", [&] { return eval::make_report(eval::confusion(truth, predicted), meta); });
  log << "tp " << report.counts.tp << " fp " << report.counts.fp << " tn " << report.counts.tn << " fn "
      << report.counts.fn << "\n";
  log << "f0 " << fixed(report.scores.f0) << " f1 " << fixed(report.scores.f1) << " afs "
      << fixed(report.scores.afs) << "\n";
  if (!cfg.csv.empty()) append_csv(cfg.csv, report);
  return report;
}

LabeledDataset matched_heldout(const LabeledDataset& heldout, const std::string& ratio, std::uint64_t seed) {
  return stage("heldout", [&] {
    return resample::undersample_to_ratio(heldout, resample::ImbalanceRatio::parse(ratio), mix_seed(seed, kHeldoutStream));
  });
}

std::uint64_t cell_seed(std::uint64_t base, const std::string& strategy, const std::string& ratio,
                        std::size_t layers, double compression) {
  const std::string key = strategy + "|" + ratio + "|" + std::to_string(layers) + "|" + fixed(compression, 6);
  return base + stable_hash(key);
}

std::vector<eval::EvaluationReport> sweep(const SweepConfig& cfg, std::ostream& log) {
  if (cfg.heldout != "matched" && cfg.heldout != "natural") {
    throw StageError("config", "--heldout must be 'matched' or 'natural'");
  }
  const Prepared prep = prepare(cfg.data, cfg.train_fraction, cfg.seed);
  std::vector<eval::EvaluationReport> rows;
  for (const std::string& ratio_text : cfg.ratios) {
    for (const std::string& strategy_text : cfg.strategies) {
      for (std::size_t layers : cfg.layer_counts) {
        for (double compression : cfg.compressions) {
          eval::RunMetadata meta{strategy_text, ratio_text, layers, compression};
          try {
            const auto ratio = stage("config", [&] { return resample::ImbalanceRatio::parse(ratio_text); });
            const auto strategy =
                stage("config", [&] { return resample::ResampleStrategy::parse(strategy_text, cfg.smote_k); });
            meta.ratio = ratio.to_string();
            const std::uint64_t seed = cell_seed(cfg.seed, meta.strategy, meta.ratio, layers, compression);
            broadnet::BroadNetConfig net = cfg.net;
            net.max_layers = layers;
            net.compression = compression;
            net.seed = seed;
            stage("config", [&] { broadnet::validate(net); });
            const auto model = train_cell(prep, ratio, strategy, cfg.minority_target, net, seed);
            const LabeledDataset heldout =
                cfg.heldout == "matched" ? matched_heldout(prep.raw.test, meta.ratio, seed) : prep.raw.test;
            const auto predicted = predict_labels(model, heldout);
            rows.push_back(eval::make_report(eval::confusion(heldout.labels, predicted), meta));
          } catch (const StageError& e) {
            rows.push_back(eval::make_error_report(meta, e.what()));
          }
          log << eval::sweep_row(rows.back(), true) << "\n";
        }
      }
    }
  }
  if (!cfg.out.empty()) write_text(cfg.out, eval::sweep_report(rows, true));
  return rows;
}

}  // namespace broadcd::cli
