#pragma once

// Structural causal models with additive noise over a DAG, ancestral
// sampling and hard interventions.

#include "varsparse/dag.hpp"
#include "varsparse/environment.hpp"
#include "varsparse/matrix.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace varsparse {

/// z_j = sum_k coefficients[k] * z_{parents[k]} + noise
struct LinearMechanism {
  std::vector<int> parents;
  std::vector<double> coefficients;
};

/// z_j = sum_k z_{parents[k]}^2 + noise
struct QuadraticSumMechanism {
  std::vector<int> parents;
};

/// The fixed six-node transcendental model; `node` selects the equation.
struct SinusoidalMechanism {
  int node = 0;
  std::vector<int> parents;
};

class Mechanism {
 public:
  using Kind = std::variant<LinearMechanism, QuadraticSumMechanism, SinusoidalMechanism>;

  explicit Mechanism(Kind kind);

  const std::vector<int>& parents() const noexcept;
  const Kind& kind() const noexcept { return kind_; }

  /// Evaluate on the full latent row `z` (parents must already be set).
  double evaluate(std::span<const double> z, double noise) const;

 private:
  Kind kind_;
};

struct GaussianNoise {
  double mean = 0.0;
  double variance = 0.1;
};

class Scm {
 public:
  Scm(DagAdjacency dag, std::vector<Mechanism> mechanisms, std::vector<GaussianNoise> noise);

  int d() const noexcept { return dag_.size(); }
  const DagAdjacency& dag() const noexcept { return dag_; }
  const Mechanism& mechanism(int j) const { return mechanisms_.at(j); }
  const GaussianNoise& noise(int j) const { return noise_.at(j); }
  const std::vector<int>& topo_order() const noexcept { return topo_order_; }

 private:
  DagAdjacency dag_;
  std::vector<Mechanism> mechanisms_;
  std::vector<GaussianNoise> noise_;
  std::vector<int> topo_order_;
};

/// Linear SCM with explicit edge weights: weights(i, j) is the coefficient of
/// z_i in the equation of z_j (only read where the DAG has i -> j).
Scm linear_scm(const DagAdjacency& dag, const Matrix& weights, std::vector<GaussianNoise> noise);

/// Coefficients i.i.d. U[-0.1, 1.0], noise N(0, 0.1) (variance) per node.
Scm sample_linear_scm(const DagAdjacency& dag, std::uint64_t seed);

/// The six-node graph shared by both built-in nonlinear models.
DagAdjacency builtin_nonlinear_dag();

/// which = 1: quadratic sums of parents. which = 2: sin/sqrt/log/atan/exp
/// equations. Noise N(0, 0.1) on every node.
Scm builtin_nonlinear_scm(int which);

/// Ancestral sampling of n rows. Targets of `intervention` are set to their
/// constants; their mechanisms and noise are skipped. Row r of node j uses a
/// counter-keyed normal draw, so the result depends only on the arguments.
Matrix sample(const Scm& scm, std::size_t n, const std::optional<InterventionRegime>& intervention,
              std::uint64_t seed);

}  // namespace varsparse
