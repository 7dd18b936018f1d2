#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

namespace broadcd::linalg {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Default ridge term for the output solve.
inline constexpr double kDefaultRidge = 1e-6;

/// Ridge term on the decoder inside the autoencoder objective.
inline constexpr double kDecoderRidge = 1e-6;

/// W = (A^T A + lambda I)^{-1} A^T Y via Cholesky.
///
/// Throws Error(SingularSystem) when lambda == 0 and A^T A is numerically
/// singular, Error(NonFiniteInput) on NaN/Inf input and
/// Error(DimensionMismatch) when the row counts differ.
Matrix ridge_pseudoinverse_solve(const Matrix& a, const Matrix& y, double lambda);

struct SparseAutoencoderConfig {
  double l1_weight = 1e-3;
  std::size_t max_iterations = 100;
  double step_tolerance = 1e-6;
  std::uint64_t seed = 0;
};

/// Throws Error(InvalidArgument) if a field is out of range.
void validate(const SparseAutoencoderConfig& cfg);

/// Value of the autoencoder objective for encoder W and decoder D:
///   1/(2n) ||X W D - X||_F^2 + kDecoderRidge/(2n) ||D||_F^2 + l1 ||W||_1
double autoencoder_objective(const Matrix& x, const Matrix& encoder, const Matrix& decoder,
                             double l1_weight);

/// Called with the iteration index (0 = initial state), the current encoder
/// and decoder, and the objective value.
using AutoencoderObserver =
    std::function<void(std::size_t iteration, const Matrix& encoder, const Matrix& decoder, double objective)>;

struct SparseAutoencoder {
  Matrix encoder;  // d x out_dim
  Matrix decoder;  // out_dim x d
  std::size_t iterations = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;
};

/// Linear sparse autoencoder trained by alternating an exact ridge decoder
/// update with proximal-gradient (soft-threshold) steps on the encoder.
/// The step size comes from a power-iteration Lipschitz estimate and is
/// halved whenever a step would raise the objective, so accepted iterates
/// never increase it.
SparseAutoencoder train_sparse_autoencoder(const Matrix& x, std::size_t out_dim,
                                           const SparseAutoencoderConfig& cfg,
                                           const AutoencoderObserver& observer = {});

/// tanh(X W), elementwise.
Matrix enhance(const Matrix& x, const Matrix& encoder);

/// Horizontal concatenation in the given order.
Matrix concat_columns(std::span<const Matrix> blocks);

/// Largest eigenvalue of a symmetric positive semi-definite matrix by power
/// iteration from a fixed start vector.
double power_iteration_max_eigenvalue(const Matrix& spd, std::size_t iterations = 200);

/// Soft-thresholding operator sign(v) max(|v| - tau, 0), elementwise.
Matrix soft_threshold(const Matrix& v, double tau);

bool all_finite(const Matrix& m) noexcept;

}  // namespace broadcd::linalg
