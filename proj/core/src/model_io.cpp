#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "broadcd/broadnet.hpp"
#include "broadcd/error.hpp"

namespace broadcd::broadnet {
namespace {

using Json = nlohmann::ordered_json;

Json matrix_to_json(const Matrix& m) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < m.size(); ++i) data.push_back(m.data()[i]);
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
  const auto rows = j.at("rows").get<std::int64_t>();
  const auto cols = j.at("cols").get<std::int64_t>();
  const Json& data = j.at("data");
  if (rows < 0 || cols < 0 || !data.is_array() || data.size() != static_cast<std::size_t>(rows * cols)) {
    throw Error(ErrorCode::FormatError, what + ": data length does not equal rows*cols");
  }
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data[i].is_number()) throw Error(ErrorCode::FormatError, what + ": non-numeric entry");
    m.data()[i] = data[i].get<double>();
  }
  if (!m.allFinite()) throw Error(ErrorCode::FormatError, what + ": non-finite entry");
  return m;
}

Json pattern_to_json(const Pattern& p) { return Json(std::vector<double>(p.begin(), p.end())); }

Pattern pattern_from_json(const Json& j, const char* what) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != kPatternWidth) {
    throw Error(ErrorCode::FormatError, std::string(what) + " must have " + std::to_string(kPatternWidth) + " entries");
  }
  Pattern p{};
  std::copy(v.begin(), v.end(), p.begin());
  return p;
}

Json config_to_json(const BroadNetConfig& c) {
  return Json{{"max_layers", c.max_layers},
              {"compression", c.compression},
              {"first_layer_width", c.first_layer_width},
              {"afs_epsilon", c.afs_epsilon},
              {"cv_folds", c.cv_folds},
              {"ridge_lambda", c.ridge_lambda},
              {"autoencoder",
               {{"l1_weight", c.autoencoder.l1_weight},
                {"max_iterations", c.autoencoder.max_iterations},
                {"step_tolerance", c.autoencoder.step_tolerance},
                {"seed", c.autoencoder.seed}}},
              {"seed", c.seed}};
}

BroadNetConfig config_from_json(const Json& j) {
  BroadNetConfig c;
  c.max_layers = j.at("max_layers").get<std::size_t>();
  c.compression = j.at("compression").get<double>();
  c.first_layer_width = j.at("first_layer_width").get<std::size_t>();
  c.afs_epsilon = j.at("afs_epsilon").get<double>();
  c.cv_folds = j.at("cv_folds").get<std::size_t>();
  c.ridge_lambda = j.at("ridge_lambda").get<double>();
  const Json& ae = j.at("autoencoder");
  c.autoencoder.l1_weight = ae.at("l1_weight").get<double>();
  c.autoencoder.max_iterations = ae.at("max_iterations").get<std::size_t>();
  c.autoencoder.step_tolerance = ae.at("step_tolerance").get<double>();
  c.autoencoder.seed = ae.at("seed").get<std::uint64_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

std::string to_json(const BroadNetModel& model) {
  Json layers = Json::array();
  for (const Matrix& l : model.layers) layers.push_back(matrix_to_json(l));
  const Json doc{{"version", kModelFormatVersion},
                 {"config", config_to_json(model.config)},
                 {"mean", pattern_to_json(model.input.mean)},
                 {"std", pattern_to_json(model.input.scale)},
                 {"layers", std::move(layers)},
                 {"output_weights", matrix_to_json(model.output_weights)},
                 {"output_bias", {model.output_bias(0), model.output_bias(1)}},
                 {"trace", model.trace}};
  return doc.dump(1) + "\n";
}

BroadNetModel from_json(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("model is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("version")) {
      throw Error(ErrorCode::FormatError, "model document has no version field");
    }
    const Json& version = doc.at("version");
    if (!version.is_number_integer() || version.get<std::int64_t>() != kModelFormatVersion) {
      throw Error(ErrorCode::VersionMismatch, "unsupported model format version " + version.dump() +
                                                  " (this build reads version " +
                                                  std::to_string(kModelFormatVersion) + ")");
    }
    BroadNetModel model;
    model.config = config_from_json(doc.at("config"));
    model.input.mean = pattern_from_json(doc.at("mean"), "mean");
    model.input.scale = pattern_from_json(doc.at("std"), "std");
    for (const Json& l : doc.at("layers")) {
      model.layers.push_back(matrix_from_json(l, "layer " + std::to_string(model.layers.size() + 1)));
    }
    model.output_weights = matrix_from_json(doc.at("output_weights"), "output_weights");
    const auto bias = doc.at("output_bias").get<std::vector<double>>();
    if (bias.size() != kClassCount) throw Error(ErrorCode::FormatError, "output_bias must have 2 entries");
    model.output_bias << bias[0], bias[1];
    model.trace = doc.at("trace").get<std::vector<double>>();
    model.check_structure();
    return model;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("malformed model document: ") + e.what());
  }
}

void save_model(const BroadNetModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << to_json(model);
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

BroadNetModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FormatError, "cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace broadcd::broadnet
