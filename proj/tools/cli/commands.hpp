#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "broadcd/broadnet.hpp"
#include "broadcd/eval.hpp"
#include "broadcd/raster.hpp"

namespace broadcd::cli {

namespace fs = std::filesystem;

/// Failure inside a named pipeline stage ("imagery", "split", "resample",
/// "fit", "model", "output", ...).
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct SynthConfig {
  std::size_t width = 64;
  std::size_t height = 64;
  std::size_t rect_x = 10;
  std::size_t rect_y = 10;
  std::size_t rect_w = 16;
  std::size_t rect_h = 16;
  double noise = 4.0;   // per-channel Gaussian sigma, 8-bit units
  double delta = 60.0;  // intensity shift inside the rectangle
  std::uint64_t seed = 0;
};

struct SynthFixture {
  RgbImage reference;
  RgbImage test;
  GrayImage mask;
};

/// Where the labeled patterns come from: one explicit pair, or every scene
/// under a root directory (pooled in scene-id order).
struct DataSource {
  fs::path ref;
  fs::path test;
  fs::path mask;
  fs::path scenes_root;
};

struct TrainConfig {
  DataSource data;
  fs::path out;
  double train_fraction = 0.7;
  std::string strategy = "smote";
  std::string ratio = "1:1";
  std::optional<std::size_t> minority_target;
  std::size_t smote_k = 5;
  broadnet::BroadNetConfig net;
  std::uint64_t seed = 0;
};

struct PredictConfig {
  fs::path model;
  fs::path ref;
  fs::path test;
  fs::path out;
};

struct EvaluateConfig {
  fs::path mask;
  fs::path pred;   // compare a rendered change map against the mask
  fs::path model;  // or predict with a model on ref/test
  fs::path ref;
  fs::path test;
  fs::path csv;
  // "all" pixels, the held-out "test" split, or "test-matched": the held-out
  // split undersampled to --ir.
  std::string subset = "all";
  double train_fraction = 0.7;
  std::string strategy = "smote";
  std::string ratio = "1:1";
  std::size_t layers = 0;      // reported when no model is given
  double compression = 0.0;
  std::uint64_t seed = 0;
};

struct SweepConfig {
  DataSource data;
  fs::path out;
  double train_fraction = 0.7;
  std::vector<std::string> ratios{"1:1", "2:1", "10:1", "50:1", "100:1", "250:1"};
  std::vector<std::string> strategies{"randover", "smote"};
  std::vector<std::size_t> layer_counts{3, 5};
  std::vector<double> compressions{0.9, 0.7};
  std::optional<std::size_t> minority_target;
  std::size_t smote_k = 5;
  // "matched": each cell is scored on the held-out split undersampled to the
  // cell's ratio; "natural": on the held-out split as is.
  std::string heldout = "matched";
  broadnet::BroadNetConfig net;  // max_layers / compression overridden per cell
  std::uint64_t seed = 0;
};

struct TrainResult {
  broadnet::BroadNetModel model;
  std::size_t train_rows = 0;  // after rebalancing
  std::size_t test_rows = 0;
};

SynthFixture synthesize(const SynthConfig& cfg);
void write_fixture(const SynthFixture& fixture, const fs::path& dir);

TrainResult train(const TrainConfig& cfg, std::ostream& log);
GrayImage predict_map(const PredictConfig& cfg);
eval::EvaluationReport evaluate(const EvaluateConfig& cfg, std::ostream& log);
std::vector<eval::EvaluationReport> sweep(const SweepConfig& cfg, std::ostream& log);

/// Seed for one sweep cell: base seed plus a stable hash of the cell.
std::uint64_t cell_seed(std::uint64_t base, const std::string& strategy, const std::string& ratio,
                        std::size_t layers, double compression);

/// The held-out split undersampled to `ratio` (no synthetic rows).
LabeledDataset matched_heldout(const LabeledDataset& heldout, const std::string& ratio, std::uint64_t seed);

/// Full command-line entry point. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace broadcd::cli
