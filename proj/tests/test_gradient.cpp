#include "doctest.h"
#include "gradient_check.hpp"

#include "varsparse/trainer.hpp"

using namespace varsparse;

TEST_SUITE("gradient") {
  TEST_CASE("every term and the total match central differences") {
    for (double temperature : {1.0, LossWeights{}.count_temperature, TrainConfig{}.final_count_temperature}) {
      LossWeights w;
      w.count_temperature = temperature;
      std::mt19937_64 rng(temperature == 1.0 ? 11 : 12);
      for (int i = 0; i < 20; ++i) {
        const auto inst = oracle::random_gradient_instance(rng, temperature);
        for (LossTerm t : kAllLossTerms) {
          CAPTURE(to_string(t));
          CHECK(oracle::gradient_relative_error(inst, t, w) < 1e-4);
        }
        CHECK(oracle::gradient_relative_error(inst, std::nullopt, w) < 1e-4);
      }
    }
  }

  TEST_CASE("stationary points") {
    // Constant batches: V is identically zero and so is its derivative.
    LossWeights var_only{0, 0, 0, 0, 1, 1};
    const Matrix cov = Matrix::Zero(3, 3);
    std::mt19937_64 rng(1);
    const Matrix lhat = oracle::random_matrix(rng, 3, 3);
    const Matrix g = term_gradient(LossTerm::Var, {cov, cov}, lhat, var_only);
    CHECK(g.cwiseAbs().maxCoeff() == 0.0);
    CHECK(evaluate_loss({cov, cov}, lhat, var_only).gradient.cwiseAbs().maxCoeff() == 0.0);

    const Matrix unit = lhat / lhat.norm();
    const Matrix gn = term_gradient(LossTerm::Norm, {Matrix::Identity(3, 3)}, unit, LossWeights{});
    CHECK(gn.cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("all-zero diagonals take the zero subgradient") {
    const Matrix cov = Matrix::Zero(2, 2);
    const Matrix g = term_gradient(LossTerm::Diag, {cov, cov}, Matrix::Identity(2, 2), LossWeights{});
    CHECK(g.allFinite());
    CHECK(g.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("training helper agrees with the oracle") {
    std::mt19937_64 rng(3);
    const auto inst = oracle::random_gradient_instance(rng, LossWeights{}.count_temperature);
    CHECK(finite_difference_error(inst.covariances, inst.lhat, LossWeights{}, 1e-5) < 1e-4);
  }
}
