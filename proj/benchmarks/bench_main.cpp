#include <benchmark/benchmark.h>

#include <random>

#include "broadcd/broadnet.hpp"
#include "broadcd/imagery.hpp"
#include "broadcd/linalg.hpp"
#include "broadcd/resample.hpp"

using namespace broadcd;
using linalg::Matrix;

namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

LabeledDataset two_classes(std::size_t n0, std::size_t n1, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  LabeledDataset data;
  for (std::size_t i = 0; i < n0 + n1; ++i) {
    Pattern p;
    for (auto& v : p) v = d(rng) + (i >= n0 ? 1.5 : 0.0);
    data.patterns.push_back(p);
    data.labels.push_back(i < n0 ? kUnchanged : kChanged);
  }
  return data;
}

void BM_RidgeSolve(benchmark::State& state) {
  const auto n = state.range(0), d = state.range(1);
  const Matrix a = gaussian(n, d, 1), y = gaussian(n, 2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(linalg::ridge_pseudoinverse_solve(a, y, 1e-6));
}
BENCHMARK(BM_RidgeSolve)->Args({50, 10})->Args({4096, 30})->Args({20000, 42});

void BM_SparseAutoencoder(benchmark::State& state) {
  const Matrix x = gaussian(state.range(0), 9, 3);
  linalg::SparseAutoencoderConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(linalg::train_sparse_autoencoder(x, 8, cfg));
}
BENCHMARK(BM_SparseAutoencoder)->Arg(500)->Arg(4000);

void BM_Smote(benchmark::State& state) {
  const auto minority = static_cast<std::size_t>(state.range(0));
  const LabeledDataset data = two_classes(100, minority, 4);
  for (auto _ : state) benchmark::DoNotOptimize(resample::smote(data, kChanged, minority * 10, 5, 5));
}
BENCHMARK(BM_Smote)->Arg(50)->Arg(500);

void BM_ExtractPatterns(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  imagery::DifferenceImage diff{side, side, std::vector<double>(side * side, 1.0)};
  imagery::LabelGrid labels{side, side, std::vector<Label>(side * side, 0)};
  for (auto _ : state) benchmark::DoNotOptimize(imagery::extract_patterns(diff, labels));
}
BENCHMARK(BM_ExtractPatterns)->Arg(64)->Arg(800);

void BM_Fit(benchmark::State& state) {
  const auto per_class = static_cast<std::size_t>(state.range(0));
  const LabeledDataset data = two_classes(per_class, per_class, 6);
  broadnet::BroadNetConfig cfg;
  cfg.max_layers = 3;
  for (auto _ : state) benchmark::DoNotOptimize(broadnet::fit(cfg, data));
}
BENCHMARK(BM_Fit)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
