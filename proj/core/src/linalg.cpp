#include "broadcd/linalg.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "broadcd/error.hpp"
#include "broadcd/seed.hpp"

namespace broadcd::linalg {
namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_finite(const Matrix& m, const char* what) {
  if (!all_finite(m)) {
    throw Error(ErrorCode::NonFiniteInput, std::string(what) + " contains NaN or Inf");
  }
}

// Halvings allowed before a proximal step is declared stalled.
constexpr int kMaxBacktracks = 60;

}  // namespace

bool all_finite(const Matrix& m) noexcept { return m.allFinite(); }

Matrix ridge_pseudoinverse_solve(const Matrix& a, const Matrix& y, double lambda) {
  if (a.rows() != y.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "A is " + shape(a) + " but Y is " + shape(y));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidArgument, "ridge lambda must be finite and >= 0");
  }
  require_finite(a, "A");
  require_finite(y, "Y");

  const Eigen::Index d = a.cols();
  Matrix gram = a.transpose() * a;
  gram.diagonal().array() += lambda;
  const Matrix rhs = a.transpose() * y;

  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, "A^T A + lambda I is not positive definite (lambda = " +
                                               std::to_string(lambda) + ")");
  }
  if (lambda == 0.0) {
    const double tol = static_cast<double>(d) * std::numeric_limits<double>::epsilon();
    if (llt.rcond() < tol) {
      throw Error(ErrorCode::SingularSystem, "A^T A is numerically singular; use lambda > 0");
    }
  }
  Matrix w = llt.solve(rhs);
  if (!w.allFinite()) {
    throw Error(ErrorCode::SingularSystem, "ridge solve produced non-finite weights");
  }
  return w;
}

void validate(const SparseAutoencoderConfig& cfg) {
  if (!(cfg.l1_weight >= 0.0) || !std::isfinite(cfg.l1_weight)) {
    throw Error(ErrorCode::InvalidArgument, "autoencoder l1 weight must be finite and >= 0");
  }
  if (cfg.max_iterations < 1) {
    throw Error(ErrorCode::InvalidArgument, "autoencoder max iterations must be >= 1");
  }
  if (!(cfg.step_tolerance > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "autoencoder step tolerance must be > 0");
  }
}

double autoencoder_objective(const Matrix& x, const Matrix& encoder, const Matrix& decoder,
                             double l1_weight) {
  const double n = static_cast<double>(x.rows());
  const Matrix residual = x * encoder * decoder - x;
  return 0.5 / n * residual.squaredNorm() + 0.5 * kDecoderRidge / n * decoder.squaredNorm() +
         l1_weight * encoder.cwiseAbs().sum();
}

double power_iteration_max_eigenvalue(const Matrix& spd, std::size_t iterations) {
  if (spd.rows() == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(spd.rows()) / std::sqrt(static_cast<double>(spd.rows()));
  double lambda = 0.0;
  for (std::size_t i = 0; i < iterations; ++i) {
    Eigen::VectorXd w = spd * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (i > 0 && std::abs(next - lambda) <= 1e-12 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

Matrix soft_threshold(const Matrix& v, double tau) {
  return v.unaryExpr([tau](double e) {
    const double mag = std::abs(e) - tau;
    return mag > 0.0 ? std::copysign(mag, e) : 0.0;
  });
}

SparseAutoencoder train_sparse_autoencoder(const Matrix& x, std::size_t out_dim,
                                           const SparseAutoencoderConfig& cfg,
                                           const AutoencoderObserver& observer) {
  validate(cfg);
  if (out_dim < 1) throw Error(ErrorCode::InvalidArgument, "autoencoder width must be >= 1");
  if (x.rows() < 1 || x.cols() < 1) throw Error(ErrorCode::InvalidArgument, "autoencoder input is empty");
  require_finite(x, "autoencoder input");

  const double n = static_cast<double>(x.rows());
  const auto width = static_cast<Eigen::Index>(out_dim);

  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> init(-1.0, 1.0);
  SparseAutoencoder out;
  out.encoder = Matrix(x.cols(), width);
  for (Eigen::Index i = 0; i < out.encoder.size(); ++i) out.encoder.data()[i] = init(rng);

  const Matrix gram_x = x.transpose() * x / n;
  const double lip_x = power_iteration_max_eigenvalue(gram_x);

  out.decoder = ridge_pseudoinverse_solve(x * out.encoder, x, kDecoderRidge);
  double objective = autoencoder_objective(x, out.encoder, out.decoder, cfg.l1_weight);
  out.initial_objective = objective;
  if (observer) observer(0, out.encoder, out.decoder, objective);

  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    // Encoder: proximal-gradient step with the decoder held fixed.
    const Matrix& dec = out.decoder;
    const Matrix gram_d = dec * dec.transpose();
    double lipschitz = lip_x * power_iteration_max_eigenvalue(gram_d);
    if (!(lipschitz > 0.0)) lipschitz = 1.0;

    const Matrix grad = x.transpose() * (x * out.encoder * dec - x) * dec.transpose() / n;
    Matrix candidate;
    double candidate_obj = objective;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      const double step = 1.0 / lipschitz;
      candidate = soft_threshold(out.encoder - step * grad, cfg.l1_weight * step);
      candidate_obj = autoencoder_objective(x, candidate, dec, cfg.l1_weight);
      if (candidate_obj <= objective) {
        accepted = true;
        break;
      }
      lipschitz *= 2.0;
    }
    if (!accepted) break;

    // Decoder: exact minimizer for the new encoder. Kept only if it does not
    // raise the objective through round-off.
    Matrix new_decoder = ridge_pseudoinverse_solve(x * candidate, x, kDecoderRidge);
    const double after_decoder = autoencoder_objective(x, candidate, new_decoder, cfg.l1_weight);
    out.encoder = std::move(candidate);
    double next = candidate_obj;
    if (after_decoder <= candidate_obj) {
      out.decoder = std::move(new_decoder);
      next = after_decoder;
    }

    const double change = std::abs(objective - next) / std::max(std::abs(objective), 1e-300);
    objective = next;
    out.iterations = it;
    if (observer) observer(it, out.encoder, out.decoder, objective);
    if (change < cfg.step_tolerance) break;
  }
  out.final_objective = objective;
  return out;
}

Matrix enhance(const Matrix& x, const Matrix& encoder) {
  if (x.cols() != encoder.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cannot multiply " + shape(x) + " activations by a " + shape(encoder) + " encoder");
  }
  // Double tanh rounds to exactly +-1 beyond |v| ~ 19; keep outputs open.
  const double bound = std::nextafter(1.0, 0.0);
  return (x * encoder).unaryExpr([bound](double v) { return std::clamp(std::tanh(v), -bound, bound); });
}

Matrix concat_columns(std::span<const Matrix> blocks) {
  if (blocks.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to concatenate");
  const Eigen::Index rows = blocks.front().rows();
  Eigen::Index cols = 0;
  for (const Matrix& b : blocks) {
    if (b.rows() != rows) {
      throw Error(ErrorCode::DimensionMismatch,
                  "block of " + std::to_string(b.rows()) + " rows among blocks of " + std::to_string(rows));
    }
    cols += b.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const Matrix& b : blocks) {
    out.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return out;
}

}  // namespace broadcd::linalg
