#include "varsparse/fastica.hpp"

#include "varsparse/dataset.hpp"
#include "varsparse/error.hpp"
#include "varsparse/kernels.hpp"
#include "varsparse/rng.hpp"

#include <cmath>
#include <numbers>

namespace varsparse {
namespace {

// W <- (W W^T)^{-1/2} W
Matrix symmetric_decorrelation(const Matrix& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w * w.transpose());
  const Eigen::VectorXd inv_sqrt = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd root = eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
  return root * w;
}

Matrix random_normal(int rows, int cols, std::uint64_t seed) {
  Engine engine(derive_seed(seed, Stream::Ica));
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double u1 = (static_cast<double>(engine() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    out.data()[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  return out;
}

}  // namespace

IcaModel fit_fastica(const Matrix& x, int d, const IcaConfig& config) {
  const auto n = x.rows();
  const auto m = x.cols();
  if (d < 1 || m < d) fail(ErrorCode::Precondition, "FastICA needs 1 <= d <= m");
  if (n <= d) fail(ErrorCode::Precondition, "FastICA needs more rows than components");
  const auto& k = kernels::active();

  IcaModel model;
  model.components = d;
  std::vector<double> sums(static_cast<std::size_t>(m));
  k.column_sums(x.data(), static_cast<std::size_t>(n), static_cast<std::size_t>(m), sums.data());
  model.mean = Eigen::Map<const Vector>(sums.data(), m) / static_cast<double>(n);

  Matrix centered = x;
  k.subtract_row(centered.data(), static_cast<std::size_t>(n), static_cast<std::size_t>(m), model.mean.data());
  Matrix cov(m, m);
  k.cross_product(centered.data(), static_cast<std::size_t>(n), static_cast<std::size_t>(m), centered.data(),
                  static_cast<std::size_t>(m), cov.data());
  cov /= static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) fail(ErrorCode::Numerical, "covariance eigendecomposition failed");
  // Eigenvalues ascend; keep the d largest.
  const Eigen::VectorXd values = eig.eigenvalues().tail(d);
  const Eigen::MatrixXd vectors = eig.eigenvectors().rightCols(d);
  if (!(values(0) > 1e-12 * values(d - 1))) fail(ErrorCode::Numerical, "covariance is rank deficient");
  model.whitening = vectors * values.cwiseSqrt().cwiseInverse().asDiagonal();

  const Matrix white = multiply(centered, model.whitening);  // n x d
  Matrix w = symmetric_decorrelation(random_normal(d, d, config.seed));
  Matrix projected(n, d);
  Matrix gx(d, d);
  for (int it = 1; it <= config.max_iter; ++it) {
    const Matrix wt = w.transpose();
    k.matmul(white.data(), static_cast<std::size_t>(n), static_cast<std::size_t>(d), wt.data(),
             static_cast<std::size_t>(d), projected.data());
    Vector slope = Vector::Zero(d);
    for (Eigen::Index r = 0; r < n; ++r) {
      double* row = projected.data() + r * d;
      for (int c = 0; c < d; ++c) {
        const double g = std::tanh(row[c]);
        row[c] = g;
        slope(c) += 1.0 - g * g;
      }
    }
    // gx(i, j) = E[g(u_i) white_j]
    k.cross_product(projected.data(), static_cast<std::size_t>(n), static_cast<std::size_t>(d), white.data(),
                    static_cast<std::size_t>(d), gx.data());
    gx /= static_cast<double>(n);
    slope /= static_cast<double>(n);
    const Matrix updated = symmetric_decorrelation(gx - slope.asDiagonal() * w);
    double change = 0.0;
    for (int i = 0; i < d; ++i) change = std::max(change, std::abs(std::abs(updated.row(i).dot(w.row(i))) - 1.0));
    w = updated;
    model.iterations = it;
    if (change < config.tol) {
      model.converged = true;
      break;
    }
  }
  model.rotation = w;
  return model;
}

Matrix transform(const IcaModel& model, const Matrix& x) {
  if (x.cols() != model.mean.size()) fail(ErrorCode::InvalidArgument, "transform input width mismatch");
  Matrix centered = x;
  kernels::active().subtract_row(centered.data(), static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(x.cols()),
                                 model.mean.data());
  const Matrix unmix = model.whitening * model.rotation.transpose();
  return multiply(centered, unmix);
}

Matrix inverse_transform(const IcaModel& model, const Matrix& s) {
  if (model.whitening.rows() != model.whitening.cols()) {
    fail(ErrorCode::InvalidArgument, "inverse transform needs as many components as observed columns");
  }
  const Matrix unmix = model.whitening * model.rotation.transpose();
  Matrix x = multiply(s, Matrix(unmix.inverse()));
  x.rowwise() += model.mean.transpose();
  return x;
}

}  // namespace varsparse
