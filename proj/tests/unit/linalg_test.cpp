#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "broadcd/linalg.hpp"
#include "support/oracles.hpp"
#include "test_util.hpp"

using namespace broadcd;
using namespace broadcd::linalg;

namespace {

Matrix from_dense(const oracle::Dense& d) {
  Matrix m(d.size(), d[0].size());
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d[0].size(); ++j) m(i, j) = d[i][j];
  return m;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return from_dense(oracle::random_dense(r, c, rng));
}

// Plain loops over the three terms of the autoencoder objective.
double objective_by_loops(const Matrix& x, const Matrix& w, const Matrix& d, double l1) {
  const auto n = x.rows(), p = x.cols(), m = w.cols();
  double recon = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> h(m, 0.0);
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index k = 0; k < p; ++k) h[j] += x(i, k) * w(k, j);
    for (Eigen::Index k = 0; k < p; ++k) {
      double r = -x(i, k);
      for (Eigen::Index j = 0; j < m; ++j) r += h[j] * d(j, k);
      recon += r * r;
    }
  }
  double dec = 0, enc = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) dec += d.data()[i] * d.data()[i];
  for (Eigen::Index i = 0; i < w.size(); ++i) enc += std::abs(w.data()[i]);
  return recon / (2.0 * n) + kDecoderRidge * dec / (2.0 * n) + l1 * enc;
}

std::size_t zero_count(const Matrix& m) {
  std::size_t z = 0;
  for (Eigen::Index i = 0; i < m.size(); ++i) z += std::abs(m.data()[i]) < 1e-10;
  return z;
}

}  // namespace

TEST(RidgeSolve, IdentitySystem) {
  const Matrix eye = Matrix::Identity(2, 2);
  EXPECT_TRUE(ridge_pseudoinverse_solve(eye, eye, 0.0).isApprox(eye, 1e-15));
}

TEST(RidgeSolve, ExactFitColumn) {
  Matrix a(2, 1), y(2, 1);
  a << 1, 1;
  y << 1, 1;
  EXPECT_NEAR(ridge_pseudoinverse_solve(a, y, 0.0)(0, 0), 1.0, 1e-15);
}

TEST(RidgeSolve, MatchesNormalEquationsOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = oracle::random_dense(50, 10, rng);
    const auto y = oracle::random_dense(50, 2, rng);
    const Matrix want = from_dense(oracle::normal_equations(a, y, 1e-6));
    const Matrix got = ridge_pseudoinverse_solve(from_dense(a), from_dense(y), 1e-6);
    EXPECT_LT((got - want).norm() / want.norm(), 1e-8);
  }
}

TEST(RidgeSolve, GradientVanishesAtSolution) {
  for (double lambda : {0.0, 1e-6, 0.1, 10.0}) {
    const Matrix a = random_matrix(40, 7, 3), y = random_matrix(40, 3, 4);
    const Matrix w = ridge_pseudoinverse_solve(a, y, lambda);
    const Matrix aty = a.transpose() * y;
    const Matrix grad = a.transpose() * a * w + lambda * w - aty;
    EXPECT_LT(grad.norm(), 1e-6 * aty.norm()) << lambda;
  }
}

TEST(RidgeSolve, ShrinksWithLambda) {
  const Matrix a = random_matrix(30, 6, 5), y = random_matrix(30, 2, 6);
  double prev = INFINITY;
  for (double lambda : {0.0, 1e-6, 1e-3, 0.1, 1.0, 10.0, 1000.0}) {
    const double norm = ridge_pseudoinverse_solve(a, y, lambda).norm();
    EXPECT_LE(norm, prev * (1 + 1e-12)) << lambda;
    prev = norm;
  }
}

TEST(RidgeSolve, SingularWithoutRidge) {
  Matrix a(3, 2);
  a << 1, 2, 2, 4, 3, 6;
  const Matrix y = Matrix::Ones(3, 1);
  EXPECT_ERROR_CODE(ridge_pseudoinverse_solve(a, y, 0.0), SingularSystem);
  EXPECT_NO_THROW(ridge_pseudoinverse_solve(a, y, 1e-6));
}

TEST(RidgeSolve, RejectsBadInput) {
  Matrix a = Matrix::Ones(3, 2);
  a(1, 1) = NAN;
  EXPECT_ERROR_CODE(ridge_pseudoinverse_solve(a, Matrix::Ones(3, 1), 1.0), NonFiniteInput);
  EXPECT_ERROR_CODE(ridge_pseudoinverse_solve(Matrix::Ones(3, 2), Matrix::Ones(4, 1), 1.0), DimensionMismatch);
  EXPECT_ERROR_CODE(ridge_pseudoinverse_solve(Matrix::Ones(3, 2), Matrix::Ones(3, 1), -1.0), InvalidArgument);
}

TEST(Autoencoder, ObjectiveMatchesLoops) {
  const Matrix x = random_matrix(25, 9, 1), w = random_matrix(9, 6, 2), d = random_matrix(6, 9, 3);
  EXPECT_NEAR(autoencoder_objective(x, w, d, 0.01), objective_by_loops(x, w, d, 0.01), 1e-10);
}

TEST(Autoencoder, ReducesObjectiveWithoutPenalty) {
  const Matrix x = random_matrix(80, 9, 7);
  SparseAutoencoderConfig cfg;
  cfg.l1_weight = 0.0;
  cfg.seed = 3;
  const SparseAutoencoder ae = train_sparse_autoencoder(x, 9, cfg);
  EXPECT_LT(ae.final_objective, ae.initial_objective);
  EXPECT_EQ(ae.encoder.rows(), 9);
  EXPECT_EQ(ae.encoder.cols(), 9);
  EXPECT_EQ(ae.decoder.rows(), 9);
  EXPECT_EQ(ae.decoder.cols(), 9);
}

TEST(Autoencoder, WidthFromCompression) {
  const Matrix x = random_matrix(150, 100, 8);
  SparseAutoencoderConfig cfg;
  cfg.max_iterations = 5;
  const auto width = static_cast<std::size_t>(std::floor(0.9 * 100));
  const SparseAutoencoder ae = train_sparse_autoencoder(x, width, cfg);
  EXPECT_EQ(ae.encoder.cols(), 90);
}

TEST(Autoencoder, ObservedObjectiveIsMonotone) {
  for (double l1 : {0.0, 1e-3, 0.05}) {
    const Matrix x = random_matrix(60, 9, 11);
    SparseAutoencoderConfig cfg;
    cfg.l1_weight = l1;
    cfg.seed = 5;
    std::vector<double> seq;
    train_sparse_autoencoder(x, 7, cfg, [&](std::size_t, const Matrix& w, const Matrix& d, double obj) {
      const double independent = objective_by_loops(x, w, d, l1);
      EXPECT_NEAR(obj, independent, 1e-9 * std::max(1.0, independent));
      seq.push_back(independent);
    });
    ASSERT_GE(seq.size(), 2u);
    for (std::size_t i = 1; i < seq.size(); ++i) EXPECT_LE(seq[i], seq[i - 1] + 1e-12) << "l1 " << l1 << " it " << i;
  }
}

TEST(Autoencoder, SparsityGrowsWithPenalty) {
  const Matrix x = random_matrix(60, 9, 13);
  std::size_t prev = 0;
  for (double l1 : {0.0, 1e-3, 1e-2, 0.05, 0.1, 0.5, 2.0}) {
    SparseAutoencoderConfig cfg;
    cfg.l1_weight = l1;
    cfg.seed = 1;
    const std::size_t zeros = zero_count(train_sparse_autoencoder(x, 8, cfg).encoder);
    EXPECT_GE(zeros, prev) << l1;
    prev = zeros;
  }
  EXPECT_GT(prev, 0u);
}

TEST(Autoencoder, DeterministicForSeed) {
  const Matrix x = random_matrix(40, 9, 2);
  SparseAutoencoderConfig cfg;
  cfg.seed = 77;
  const auto a = train_sparse_autoencoder(x, 5, cfg), b = train_sparse_autoencoder(x, 5, cfg);
  EXPECT_EQ(a.encoder, b.encoder);
  EXPECT_EQ(a.decoder, b.decoder);
}

TEST(Autoencoder, RejectsBadInput) {
  Matrix x = random_matrix(10, 3, 1);
  SparseAutoencoderConfig cfg;
  EXPECT_ERROR_CODE(train_sparse_autoencoder(x, 0, cfg), InvalidArgument);
  cfg.max_iterations = 0;
  EXPECT_ERROR_CODE(train_sparse_autoencoder(x, 2, cfg), InvalidArgument);
  cfg = {};
  cfg.step_tolerance = 0.0;
  EXPECT_ERROR_CODE(train_sparse_autoencoder(x, 2, cfg), InvalidArgument);
  cfg = {};
  cfg.l1_weight = -1.0;
  EXPECT_ERROR_CODE(train_sparse_autoencoder(x, 2, cfg), InvalidArgument);
  x(0, 0) = INFINITY;
  EXPECT_ERROR_CODE(train_sparse_autoencoder(x, 2, SparseAutoencoderConfig{}), NonFiniteInput);
}

TEST(SoftThreshold, Elementwise) {
  Matrix v(1, 4);
  v << 3.0, -0.5, 0.2, -2.0;
  Matrix want(1, 4);
  want << 2.0, 0.0, 0.0, -1.0;
  EXPECT_EQ(soft_threshold(v, 1.0), want);
}

TEST(PowerIteration, DiagonalMatrix) {
  Matrix m = Matrix::Zero(3, 3);
  m.diagonal() << 2.0, 7.0, 3.0;
  EXPECT_NEAR(power_iteration_max_eigenvalue(m), 7.0, 1e-9);
}

TEST(Enhance, ZeroEncoderGivesZeros) {
  const Matrix x = random_matrix(5, 4, 1);
  EXPECT_EQ(enhance(x, Matrix::Zero(4, 3)), Matrix::Zero(5, 3));
}

TEST(Enhance, ScalarTanh) {
  Matrix x(1, 1), w(1, 1);
  x << 1.0;
  w << 0.5;
  EXPECT_NEAR(enhance(x, w)(0, 0), 0.46211715726000974, 1e-4);
}

TEST(Enhance, OutputsStayOpenInterval) {
  Matrix x = random_matrix(20, 3, 2) * 1e3;
  const Matrix out = enhance(x, random_matrix(3, 4, 3));
  EXPECT_LT(out.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Enhance, OneLipschitzInPreactivation) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  Matrix eye = Matrix::Identity(1, 1);
  for (int i = 0; i < 1000; ++i) {
    Matrix a(1, 1), b(1, 1);
    a << u(rng);
    b << u(rng);
    EXPECT_LE(std::abs(enhance(a, eye)(0, 0) - enhance(b, eye)(0, 0)), std::abs(a(0, 0) - b(0, 0)) + 1e-15);
  }
}

TEST(Enhance, InnerDimensionMismatch) {
  EXPECT_ERROR_CODE(enhance(Matrix::Ones(2, 3), Matrix::Ones(4, 1)), DimensionMismatch);
}

TEST(ConcatColumns, SingleBlockUnchanged) {
  const Matrix a = random_matrix(4, 3, 1);
  const Matrix blocks[] = {a};
  EXPECT_EQ(concat_columns(blocks), a);
}

TEST(ConcatColumns, PreservesOrderAndWidths) {
  const Matrix a = random_matrix(5, 9, 1), b = random_matrix(5, 8, 2), c = random_matrix(5, 7, 3);
  const Matrix blocks[] = {a, b, c};
  const Matrix out = concat_columns(blocks);
  EXPECT_EQ(out.cols(), 24);
  EXPECT_EQ(Matrix(out.leftCols(9)), a);
  EXPECT_EQ(Matrix(out.middleCols(9, 8)), b);
  EXPECT_EQ(Matrix(out.rightCols(7)), c);
}

TEST(ConcatColumns, RowMismatch) {
  const Matrix blocks[] = {Matrix::Ones(2, 1), Matrix::Ones(3, 1)};
  EXPECT_ERROR_CODE(concat_columns(blocks), DimensionMismatch);
}
