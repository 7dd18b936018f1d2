#include "broadcd/imagery.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "broadcd/error.hpp"
#include "broadcd/png_io.hpp"
#include "broadcd/seed.hpp"

namespace broadcd::imagery {
namespace {

// sRGB primaries. The D65 white is taken as the row sums so that RGB white
// lands on L = 100 exactly.
constexpr double kM[3][3] = {{0.4124564, 0.3575761, 0.1804375},
                             {0.2126729, 0.7151522, 0.0721750},
                             {0.0193339, 0.1191920, 0.9503041}};
constexpr double kWhiteX = kM[0][0] + kM[0][1] + kM[0][2];
constexpr double kWhiteY = kM[1][0] + kM[1][1] + kM[1][2];
constexpr double kWhiteZ = kM[2][0] + kM[2][1] + kM[2][2];

double srgb_to_linear(double c) noexcept {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) noexcept {
  constexpr double kDelta = 6.0 / 29.0;
  constexpr double kDelta3 = kDelta * kDelta * kDelta;
  return t > kDelta3 ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

void check_raster(const RgbImage& img, const char* which) {
  if (img.width == 0 || img.height == 0) {
    throw Error(ErrorCode::InvalidArgument, std::string(which) + " image is empty");
  }
  if (img.pixels.size() != img.width * img.height * 3) {
    throw Error(ErrorCode::InvalidArgument, std::string(which) + " raster length is not width*height*3");
  }
}

std::string dims(std::size_t w, std::size_t h) {
  return std::to_string(w) + "x" + std::to_string(h);
}

}  // namespace

ImagePair::ImagePair(RgbImage reference, RgbImage test)
    : reference_(std::move(reference)), test_(std::move(test)) {
  check_raster(reference_, "reference");
  check_raster(test_, "test");
  if (reference_.width != test_.width || reference_.height != test_.height) {
    throw Error(ErrorCode::DimensionMismatch,
                "reference is " + dims(reference_.width, reference_.height) + " but test is " +
                    dims(test_.width, test_.height));
  }
}

std::size_t LabelGrid::count(Label label) const noexcept {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

ImagePair load_image_pair(const std::filesystem::path& reference_path,
                          const std::filesystem::path& test_path) {
  return ImagePair(png::read_rgb(reference_path), png::read_rgb(test_path));
}

Lab rgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  const double rl = srgb_to_linear(r / 255.0);
  const double gl = srgb_to_linear(g / 255.0);
  const double bl = srgb_to_linear(b / 255.0);

  const double x = kM[0][0] * rl + kM[0][1] * gl + kM[0][2] * bl;
  const double y = kM[1][0] * rl + kM[1][1] * gl + kM[1][2] * bl;
  const double z = kM[2][0] * rl + kM[2][1] * gl + kM[2][2] * bl;

  const double fx = lab_f(x / kWhiteX);
  const double fy = lab_f(y / kWhiteY);
  const double fz = lab_f(z / kWhiteZ);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

LabImage rgb_to_lab(const RgbImage& image) {
  LabImage out{image.width, image.height, std::vector<double>(image.pixel_count() * 3)};
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    const std::uint8_t* p = &image.pixels[i * 3];
    const Lab lab = rgb_to_lab(p[0], p[1], p[2]);
    out.values[i * 3 + 0] = lab.l;
    out.values[i * 3 + 1] = lab.a;
    out.values[i * 3 + 2] = lab.b;
  }
  return out;
}

DifferenceImage difference_magnitude(const ImagePair& pair) {
  return difference_magnitude(rgb_to_lab(pair.reference()), rgb_to_lab(pair.test()));
}

DifferenceImage difference_magnitude(const LabImage& ref, const LabImage& tst) {
  if (ref.width != tst.width || ref.height != tst.height || ref.values.size() != tst.values.size() ||
      ref.values.size() != ref.width * ref.height * 3) {
    throw Error(ErrorCode::DimensionMismatch, "L*a*b* rasters differ in size");
  }
  DifferenceImage out{ref.width, ref.height, std::vector<double>(ref.values.size() / 3)};
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double dl = std::abs(ref.values[i * 3 + 0] - tst.values[i * 3 + 0]);
    const double da = std::abs(ref.values[i * 3 + 1] - tst.values[i * 3 + 1]);
    const double db = std::abs(ref.values[i * 3 + 2] - tst.values[i * 3 + 2]);
    out.values[i] = std::sqrt(dl * dl + da * da + db * db);
  }
  return out;
}

LabelGrid binarize_mask(const RgbImage& mask) {
  check_raster(mask, "mask");
  LabelGrid out{mask.width, mask.height, std::vector<Label>(mask.pixel_count())};
  for (std::size_t i = 0; i < mask.pixel_count(); ++i) {
    const std::uint8_t* p = &mask.pixels[i * 3];
    // Rec. 601 luma in integer arithmetic; exact for gray pixels.
    const unsigned luma = (299u * p[0] + 587u * p[1] + 114u * p[2] + 500u) / 1000u;
    out.labels[i] = luma > 127u ? kChanged : kUnchanged;
  }
  return out;
}

LabelGrid binarize_mask(const std::filesystem::path& mask_path) {
  return binarize_mask(png::read_rgb(mask_path));
}

LabeledDataset extract_patterns(const DifferenceImage& diff, const LabelGrid& labels) {
  if (diff.width != labels.width || diff.height != labels.height) {
    throw Error(ErrorCode::DimensionMismatch,
                "difference image is " + dims(diff.width, diff.height) + " but label grid is " +
                    dims(labels.width, labels.height));
  }
  if (diff.values.size() != diff.width * diff.height ||
      labels.labels.size() != labels.width * labels.height) {
    throw Error(ErrorCode::DimensionMismatch, "grid length does not match its dimensions");
  }

  const std::size_t w = diff.width;
  const std::size_t h = diff.height;
  LabeledDataset out;
  out.patterns.reserve(w * h);
  out.labels.reserve(w * h);
  out.coords.reserve(w * h);

  auto clamp = [](std::size_t v, int d, std::size_t n) -> std::size_t {
    if (d < 0) return v == 0 ? 0 : v - 1;
    if (d > 0) return v + 1 >= n ? n - 1 : v + 1;
    return v;
  };

  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      Pattern p{};
      std::size_t k = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          p[k++] = diff.at(clamp(x, dx, w), clamp(y, dy, h));
        }
      }
      out.patterns.push_back(p);
      out.labels.push_back(labels.at(x, y));
      out.coords.push_back({x, y});
    }
  }
  return out;
}

Split split_dataset(const LabeledDataset& data, double train_fraction, std::uint64_t seed) {
  data.validate();
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "train fraction must lie in (0,1)");
  }
  Rng rng(seed);
  std::vector<bool> in_train(data.size(), false);
  for (Label label : {kUnchanged, kChanged}) {
    std::vector<std::size_t> idx = data.indices_of(label);
    if (idx.size() < 2) {
      throw Error(ErrorCode::InsufficientClassSamples,
                  "class " + std::to_string(label) + " has " + std::to_string(idx.size()) +
                      " samples; a stratified split needs at least 2");
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto want = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(idx.size())));
    const std::size_t n_train = std::max<std::size_t>(1, want);
    for (std::size_t i = 0; i < n_train; ++i) in_train[idx[i]] = true;
  }

  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (in_train[i] ? train_rows : test_rows).push_back(i);
  }
  return {subset(data, train_rows), subset(data, test_rows)};
}

Standardization Standardization::identity() noexcept {
  Standardization s;
  s.mean.fill(0.0);
  s.scale.fill(1.0);
  return s;
}

Standardization Standardization::fit(const LabeledDataset& train) {
  if (train.empty()) {
    throw Error(ErrorCode::InvalidArgument, "cannot estimate standardization from an empty set");
  }
  Standardization s;
  const double n = static_cast<double>(train.size());
  for (std::size_t d = 0; d < kPatternWidth; ++d) {
    double sum = 0.0;
    for (const Pattern& p : train.patterns) sum += p[d];
    const double mean = sum / n;
    double ss = 0.0;
    for (const Pattern& p : train.patterns) ss += (p[d] - mean) * (p[d] - mean);
    const double sd = std::sqrt(ss / n);
    s.mean[d] = mean;
    s.scale[d] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Pattern Standardization::apply(const Pattern& p) const noexcept {
  Pattern out{};
  for (std::size_t d = 0; d < kPatternWidth; ++d) out[d] = (p[d] - mean[d]) / scale[d];
  return out;
}

LabeledDataset Standardization::apply(const LabeledDataset& data) const {
  LabeledDataset out = data;
  for (Pattern& p : out.patterns) p = apply(p);
  return out;
}

Standardization Standardization::after(const Standardization& first) const noexcept {
  Standardization s;
  for (std::size_t d = 0; d < kPatternWidth; ++d) {
    s.mean[d] = first.mean[d] + mean[d] * first.scale[d];
    s.scale[d] = first.scale[d] * scale[d];
  }
  return s;
}

Standardized standardize(const LabeledDataset& train, const std::vector<LabeledDataset>& others) {
  Standardized out;
  out.record = Standardization::fit(train);
  out.train = out.record.apply(train);
  out.others.reserve(others.size());
  for (const LabeledDataset& o : others) out.others.push_back(out.record.apply(o));
  return out;
}

std::vector<SceneFiles> list_scenes(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::IoError, root.string() + " is not a directory");
  }
  std::vector<SceneFiles> scenes;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    SceneFiles s{entry.path().filename().string(), entry.path() / "ref.png",
                 entry.path() / "test.png", entry.path() / "mask.png"};
    if (fs::is_regular_file(s.reference) && fs::is_regular_file(s.test) &&
        fs::is_regular_file(s.mask)) {
      scenes.push_back(std::move(s));
    }
  }
  std::sort(scenes.begin(), scenes.end(),
            [](const SceneFiles& a, const SceneFiles& b) { return a.id < b.id; });
  return scenes;
}

LabeledDataset load_scene_patterns(const std::filesystem::path& reference_path,
                                   const std::filesystem::path& test_path,
                                   const std::filesystem::path& mask_path) {
  const ImagePair pair = load_image_pair(reference_path, test_path);
  const LabelGrid labels = binarize_mask(mask_path);
  return extract_patterns(difference_magnitude(pair), labels);
}

}  // namespace broadcd::imagery
