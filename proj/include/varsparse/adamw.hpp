#pragma once

#include "varsparse/matrix.hpp"

namespace varsparse {

struct AdamWConfig {
  double learning_rate = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;

  void validate() const;
};

/// Adam with decoupled weight decay:
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
///   theta <- theta - lr (m_hat / (sqrt(v_hat) + eps) + wd theta)
/// with bias-corrected m_hat, v_hat.
class AdamW {
 public:
  AdamW(Eigen::Index rows, Eigen::Index cols, AdamWConfig config);

  void step(Matrix& params, const Matrix& grad);

  long steps() const noexcept { return t_; }
  const Matrix& first_moment() const noexcept { return m_; }
  const Matrix& second_moment() const noexcept { return v_; }
  const AdamWConfig& config() const noexcept { return config_; }

 private:
  AdamWConfig config_;
  Matrix m_;
  Matrix v_;
  long t_ = 0;
};

}  // namespace varsparse
