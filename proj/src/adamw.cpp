#include "varsparse/adamw.hpp"

#include "varsparse/error.hpp"

#include <cmath>

namespace varsparse {

void AdamWConfig::validate() const {
  if (!(learning_rate > 0.0)) fail(ErrorCode::InvalidArgument, "learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    fail(ErrorCode::InvalidArgument, "adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) fail(ErrorCode::InvalidArgument, "adam eps must be positive");
  if (!(weight_decay >= 0.0)) fail(ErrorCode::InvalidArgument, "weight decay must be >= 0");
}

AdamW::AdamW(Eigen::Index rows, Eigen::Index cols, AdamWConfig config)
    : config_(config), m_(Matrix::Zero(rows, cols)), v_(Matrix::Zero(rows, cols)) {
  config_.validate();
}

void AdamW::step(Matrix& params, const Matrix& grad) {
  if (params.rows() != m_.rows() || params.cols() != m_.cols() || grad.rows() != m_.rows() ||
      grad.cols() != m_.cols()) {
    fail(ErrorCode::InvalidArgument, "optimizer state shape does not match parameters");
  }
  ++t_;
  const double lr = config_.learning_rate;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  params *= 1.0 - lr * config_.weight_decay;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double g = grad.data()[i];
    double& m = m_.data()[i];
    double& v = v_.data()[i];
    m = config_.beta1 * m + (1.0 - config_.beta1) * g;
    v = config_.beta2 * v + (1.0 - config_.beta2) * g * g;
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    params.data()[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.eps);
  }
}

}  // namespace varsparse
