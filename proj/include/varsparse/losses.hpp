#pragma once

// Variance-sparsity objective on the learned representation.
//
// Every term is a function of V, the environments x dimensions matrix of
// per-environment variances of the learned representation z~ * Lhat, except
// the norm term which acts on Lhat directly. The three count-like terms pass
// V / temperature through a sigmoid; temperature 1 is the plain sigmoid.

#include "varsparse/matrix.hpp"

#include <array>
#include <string_view>
#include <vector>

namespace varsparse {

struct LossWeights {
  double lambda_e = 1.0;
  double lambda_m = 1.0;
  double lambda_diag = 10.0;
  double lambda_norm = 5.0;
  double norm_target = 1.0;
  /// Divides V inside the sigmoid of the support-count terms. With latent
  /// noise variance 0.1 and ||Lhat||_F = 1 the raw variances sit in the
  /// linear part of the sigmoid, where the count terms stop separating zero
  /// from nonzero variance. Training anneals this starting value, see
  /// TrainConfig::final_count_temperature.
  double count_temperature = 1e-1;

  void validate() const;
};

enum class LossTerm { Var, Env, Dim, Diag, Norm };

inline constexpr std::array<LossTerm, 5> kAllLossTerms{LossTerm::Var, LossTerm::Env, LossTerm::Dim, LossTerm::Diag,
                                                       LossTerm::Norm};

std::string_view to_string(LossTerm term) noexcept;

struct LossBreakdown {
  double var = 0.0;
  double env = 0.0;
  double dim = 0.0;
  double diag = 0.0;
  double norm = 0.0;
  double total = 0.0;  ///< var + lambda_e env + lambda_m dim + lambda_diag diag + lambda_norm norm

  double term(LossTerm t) const noexcept;
};

double sigmoid(double x) noexcept;

/// sum_ij sigmoid(V_ij / temperature)
double loss_var(const Matrix& v, double temperature = 1.0);
/// -sum_i sigmoid(sum_j V_ij / temperature)
double loss_env(const Matrix& v, double temperature = 1.0);
/// -sum_j sigmoid(sum_i V_ij / temperature)
double loss_dim(const Matrix& v, double temperature = 1.0);

/// Wrap-around diagonal with the given column offset (0 is the main
/// diagonal): element i is V(i, (i + offset) mod cols). Works for any number
/// of rows, so designs with E != d environments are covered.
std::vector<double> wrap_diagonal(const Matrix& v, int offset);

/// sum over offsets of the Euclidean norm of each wrap-around diagonal
double loss_diag(const Matrix& v);

/// (||Lhat||_F - target)^2
double loss_norm(const Matrix& lhat, double target = 1.0);

double term_value(LossTerm term, const Matrix& v, const Matrix& lhat, const LossWeights& w);
LossBreakdown total_loss(const Matrix& v, const Matrix& lhat, const LossWeights& w);

/// Biased (divide-by-n) covariance of a batch; exact zeros for constant columns.
Matrix batch_covariance(const Matrix& batch);

/// V(e, k) = Var(column k of batch_e * lhat), computed from batch covariances.
Matrix variance_matrix(const std::vector<Matrix>& covariances, const Matrix& lhat);

/// Same, starting from raw batches (each needs at least two rows).
Matrix variance_matrix_from_batches(const std::vector<Matrix>& batches, const Matrix& lhat);

struct LossEvaluation {
  LossBreakdown terms;
  Matrix variances;
  Matrix gradient;  ///< d total / d lhat
};

/// Loss and exact gradient w.r.t. lhat. The gradient flows through
/// V(e, k) = l_k' C_e l_k, so dV(e, k)/dl_k = 2 C_e l_k. A zero diagonal
/// contributes a zero subgradient. Throws Numerical on non-finite values.
LossEvaluation evaluate_loss(const std::vector<Matrix>& covariances, const Matrix& lhat, const LossWeights& w);

/// Gradient of a single unweighted term (temperature still applies).
Matrix term_gradient(LossTerm term, const std::vector<Matrix>& covariances, const Matrix& lhat, const LossWeights& w);

}  // namespace varsparse
