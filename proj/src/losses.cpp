#include "varsparse/losses.hpp"

#include "varsparse/error.hpp"
#include "varsparse/kernels.hpp"

#include <cmath>
#include <string>

namespace varsparse {

void LossWeights::validate() const {
  const double vals[] = {lambda_e, lambda_m, lambda_diag, lambda_norm};
  for (double v : vals) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorCode::InvalidArgument, "loss weights must be finite and >= 0");
  }
  if (!(norm_target > 0.0)) fail(ErrorCode::InvalidArgument, "norm target must be positive");
  if (!(count_temperature > 0.0)) fail(ErrorCode::InvalidArgument, "count temperature must be positive");
}

std::string_view to_string(LossTerm term) noexcept {
  switch (term) {
    case LossTerm::Var: return "var";
    case LossTerm::Env: return "env";
    case LossTerm::Dim: return "dim";
    case LossTerm::Diag: return "diag";
    case LossTerm::Norm: return "norm";
  }
  return "?";
}

double LossBreakdown::term(LossTerm t) const noexcept {
  switch (t) {
    case LossTerm::Var: return var;
    case LossTerm::Env: return env;
    case LossTerm::Dim: return dim;
    case LossTerm::Diag: return diag;
    case LossTerm::Norm: return norm;
  }
  return 0.0;
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

double sigmoid_slope(double x) noexcept {
  const double s = sigmoid(x);
  return s * (1.0 - s);
}

void require_nonempty(const Matrix& v) {
  if (v.rows() == 0 || v.cols() == 0) fail(ErrorCode::InvalidArgument, "variance matrix is empty");
}

Eigen::Index wrap_column(Eigen::Index row, int offset, Eigen::Index cols) { return (row + offset) % cols; }

std::vector<double> diagonal_norms(const Matrix& v) {
  std::vector<double> norms(static_cast<std::size_t>(v.cols()), 0.0);
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      // V(i, j) lies on the diagonal with offset (j - i) mod cols.
      const auto offset = static_cast<std::size_t>(((j - i) % v.cols() + v.cols()) % v.cols());
      norms[offset] += v(i, j) * v(i, j);
    }
  }
  for (double& n : norms) n = std::sqrt(n);
  return norms;
}

// d term / d V, unweighted.
Matrix variance_gradient(LossTerm term, const Matrix& v, double temperature) {
  Matrix g = Matrix::Zero(v.rows(), v.cols());
  switch (term) {
    case LossTerm::Var:
      for (Eigen::Index i = 0; i < v.size(); ++i) g.data()[i] = sigmoid_slope(v.data()[i] / temperature) / temperature;
      break;
    case LossTerm::Env:
      for (Eigen::Index i = 0; i < v.rows(); ++i) g.row(i).setConstant(-sigmoid_slope(v.row(i).sum() / temperature) / temperature);
      break;
    case LossTerm::Dim:
      for (Eigen::Index j = 0; j < v.cols(); ++j) g.col(j).setConstant(-sigmoid_slope(v.col(j).sum() / temperature) / temperature);
      break;
    case LossTerm::Diag: {
      const auto norms = diagonal_norms(v);
      for (Eigen::Index i = 0; i < v.rows(); ++i) {
        for (Eigen::Index j = 0; j < v.cols(); ++j) {
          const double n = norms[static_cast<std::size_t>(((j - i) % v.cols() + v.cols()) % v.cols())];
          g(i, j) = n > 0.0 ? v(i, j) / n : 0.0;
        }
      }
      break;
    }
    case LossTerm::Norm:
      break;
  }
  return g;
}

Matrix norm_gradient(const Matrix& lhat, double target) {
  const double fro = lhat.norm();
  if (fro == 0.0) return Matrix::Zero(lhat.rows(), lhat.cols());
  return (2.0 * (fro - target) / fro) * lhat;
}

// Chain rule from dL/dV to dL/dlhat.
Matrix backprop_variances(const Matrix& dv, const std::vector<Matrix>& covariances, const Matrix& lhat) {
  Matrix grad = Matrix::Zero(lhat.rows(), lhat.cols());
  for (std::size_t e = 0; e < covariances.size(); ++e) {
    const Matrix cl = covariances[e] * lhat;  // column k is C_e l_k
    for (Eigen::Index k = 0; k < lhat.cols(); ++k) grad.col(k) += (2.0 * dv(static_cast<Eigen::Index>(e), k)) * cl.col(k);
  }
  return grad;
}

void check_covariances(const std::vector<Matrix>& covariances, const Matrix& lhat) {
  if (covariances.empty()) fail(ErrorCode::InvalidArgument, "need at least one environment");
  for (const auto& c : covariances) {
    if (c.rows() != lhat.rows() || c.cols() != lhat.rows()) {
      fail(ErrorCode::InvalidArgument, "covariance shape does not match lhat rows");
    }
  }
}

}  // namespace

double loss_var(const Matrix& v, double temperature) {
  require_nonempty(v);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += sigmoid(v.data()[i] / temperature);
  return acc;
}

double loss_env(const Matrix& v, double temperature) {
  require_nonempty(v);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i) acc -= sigmoid(v.row(i).sum() / temperature);
  return acc;
}

double loss_dim(const Matrix& v, double temperature) {
  require_nonempty(v);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < v.cols(); ++j) acc -= sigmoid(v.col(j).sum() / temperature);
  return acc;
}

std::vector<double> wrap_diagonal(const Matrix& v, int offset) {
  require_nonempty(v);
  if (offset < 0 || offset >= v.cols()) {
    fail(ErrorCode::InvalidArgument, "diagonal offset " + std::to_string(offset) + " outside [0," +
                                         std::to_string(v.cols()) + ")");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(v.rows()));
  for (Eigen::Index i = 0; i < v.rows(); ++i) out.push_back(v(i, wrap_column(i, offset, v.cols())));
  return out;
}

double loss_diag(const Matrix& v) {
  require_nonempty(v);
  double acc = 0.0;
  for (double n : diagonal_norms(v)) acc += n;
  return acc;
}

double loss_norm(const Matrix& lhat, double target) {
  const double diff = lhat.norm() - target;
  return diff * diff;
}

double term_value(LossTerm term, const Matrix& v, const Matrix& lhat, const LossWeights& w) {
  switch (term) {
    case LossTerm::Var: return loss_var(v, w.count_temperature);
    case LossTerm::Env: return loss_env(v, w.count_temperature);
    case LossTerm::Dim: return loss_dim(v, w.count_temperature);
    case LossTerm::Diag: return loss_diag(v);
    case LossTerm::Norm: return loss_norm(lhat, w.norm_target);
  }
  return 0.0;
}

LossBreakdown total_loss(const Matrix& v, const Matrix& lhat, const LossWeights& w) {
  LossBreakdown b;
  b.var = term_value(LossTerm::Var, v, lhat, w);
  b.env = term_value(LossTerm::Env, v, lhat, w);
  b.dim = term_value(LossTerm::Dim, v, lhat, w);
  b.diag = term_value(LossTerm::Diag, v, lhat, w);
  b.norm = term_value(LossTerm::Norm, v, lhat, w);
  b.total = b.var + w.lambda_e * b.env + w.lambda_m * b.dim + w.lambda_diag * b.diag + w.lambda_norm * b.norm;
  return b;
}

Matrix batch_covariance(const Matrix& batch) {
  if (batch.rows() < 2) fail(ErrorCode::InvalidArgument, "variance needs a batch of at least 2 rows");
  const auto& k = kernels::active();
  const auto rows = static_cast<std::size_t>(batch.rows());
  const auto cols = static_cast<std::size_t>(batch.cols());
  // Shift by the first row, then center: constant columns become exact zeros.
  Matrix centered = batch;
  const std::vector<double> first(batch.data(), batch.data() + cols);
  k.subtract_row(centered.data(), rows, cols, first.data());
  std::vector<double> mean(cols);
  k.column_sums(centered.data(), rows, cols, mean.data());
  for (double& m : mean) m /= static_cast<double>(rows);
  k.subtract_row(centered.data(), rows, cols, mean.data());
  Matrix cov(batch.cols(), batch.cols());
  k.cross_product(centered.data(), rows, cols, centered.data(), cols, cov.data());
  cov /= static_cast<double>(rows);
  return cov;
}

Matrix variance_matrix(const std::vector<Matrix>& covariances, const Matrix& lhat) {
  check_covariances(covariances, lhat);
  Matrix v(static_cast<Eigen::Index>(covariances.size()), lhat.cols());
  for (std::size_t e = 0; e < covariances.size(); ++e) {
    const Matrix cl = covariances[e] * lhat;
    for (Eigen::Index k = 0; k < lhat.cols(); ++k) {
      // Clamp rounding noise: the quadratic form of a PSD matrix is >= 0.
      v(static_cast<Eigen::Index>(e), k) = std::max(0.0, lhat.col(k).dot(cl.col(k)));
    }
  }
  return v;
}

Matrix variance_matrix_from_batches(const std::vector<Matrix>& batches, const Matrix& lhat) {
  std::vector<Matrix> covs;
  covs.reserve(batches.size());
  for (const auto& b : batches) {
    if (b.cols() != lhat.rows()) fail(ErrorCode::InvalidArgument, "batch columns must equal lhat rows");
    covs.push_back(batch_covariance(b));
  }
  return variance_matrix(covs, lhat);
}

Matrix term_gradient(LossTerm term, const std::vector<Matrix>& covariances, const Matrix& lhat, const LossWeights& w) {
  check_covariances(covariances, lhat);
  if (term == LossTerm::Norm) return norm_gradient(lhat, w.norm_target);
  const Matrix v = variance_matrix(covariances, lhat);
  return backprop_variances(variance_gradient(term, v, w.count_temperature), covariances, lhat);
}

LossEvaluation evaluate_loss(const std::vector<Matrix>& covariances, const Matrix& lhat, const LossWeights& w) {
  check_covariances(covariances, lhat);
  LossEvaluation out;
  out.variances = variance_matrix(covariances, lhat);
  out.terms = total_loss(out.variances, lhat, w);
  const double t = w.count_temperature;
  Matrix dv = variance_gradient(LossTerm::Var, out.variances, t);
  if (w.lambda_e != 0.0) dv += w.lambda_e * variance_gradient(LossTerm::Env, out.variances, t);
  if (w.lambda_m != 0.0) dv += w.lambda_m * variance_gradient(LossTerm::Dim, out.variances, t);
  if (w.lambda_diag != 0.0) dv += w.lambda_diag * variance_gradient(LossTerm::Diag, out.variances, t);
  out.gradient = backprop_variances(dv, covariances, lhat);
  if (w.lambda_norm != 0.0) out.gradient += w.lambda_norm * norm_gradient(lhat, w.norm_target);
  if (!std::isfinite(out.terms.total) || !out.gradient.allFinite()) {
    fail(ErrorCode::Numerical, "non-finite loss or gradient (total=" + std::to_string(out.terms.total) + ")");
  }
  return out;
}

}  // namespace varsparse
