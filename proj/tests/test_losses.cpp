#include "doctest.h"
#include "oracles.hpp"

#include "varsparse/error.hpp"
#include "varsparse/experiment.hpp"
#include "varsparse/losses.hpp"
#include "varsparse/metrics.hpp"

#include <cmath>

using namespace varsparse;

namespace {

Matrix mat3(std::initializer_list<double> v) {
  Matrix m(3, 3);
  auto it = v.begin();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = *it++;
  return m;
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<Matrix> example_batches(std::size_t n, std::uint64_t seed) {
  const EnvDataset data = generate(example_scm(), example_design(), example_mixing(), n, seed);
  std::vector<Matrix> out;
  for (std::size_t e = 0; e < data.num_envs(); ++e) out.push_back(data.observed(e));
  return out;
}

}  // namespace

TEST_SUITE("losses") {
  TEST_CASE("support count") {
    CHECK(loss_var(Matrix::Zero(3, 3)) == doctest::Approx(4.5));
    Matrix v = Matrix::Zero(3, 3);
    v(1, 2) = 9.0;
    CHECK(loss_var(v) == doctest::Approx(4.0 + sig(9.0)));
    CHECK(loss_var(v) == doctest::Approx(4.99988).epsilon(1e-5));
    std::mt19937_64 rng(1);
    for (int t = 0; t < 100; ++t) {
      const Matrix a = oracle::random_matrix(rng, 4, 3, 0.0, 2.0);
      const Matrix b = a + oracle::random_matrix(rng, 4, 3, 0.0, 1.0);
      CHECK(loss_var(b) >= loss_var(a));
    }
    CHECK(loss_var(v, 0.5) == doctest::Approx(4.0 + sig(18.0)));
  }

  TEST_CASE("per-environment and per-dimension terms") {
    CHECK(loss_env(Matrix::Zero(3, 3)) == doctest::Approx(-1.5));
    CHECK(loss_dim(Matrix::Zero(3, 3)) == doctest::Approx(-1.5));
    const Matrix five = Matrix::Identity(3, 3) * 5.0;
    CHECK(loss_env(five) == doctest::Approx(-3.0 * sig(5.0)));
    CHECK(loss_env(five) == doctest::Approx(-2.9799).epsilon(1e-4));
    CHECK(loss_dim(five) == doctest::Approx(-2.9799).epsilon(1e-4));
    const Matrix huge = Matrix::Constant(4, 3, 1e6);
    CHECK(loss_env(huge) == doctest::Approx(-4.0));
    CHECK(loss_dim(huge) == doctest::Approx(-3.0));
    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
      const Matrix v = oracle::random_matrix(rng, 5, 3, 0.0, 3.0);
      CHECK(loss_env(v) > -5.0);
      CHECK(loss_env(v) <= -2.5);
      // Rows and columns swap roles under transposition.
      CHECK(loss_dim(v) == doctest::Approx(loss_env(Matrix(v.transpose()))));
    }
  }

  TEST_CASE("wrap-around diagonals") {
    const Matrix a = mat3({11, 12, 13, 21, 22, 23, 31, 32, 33});
    CHECK(wrap_diagonal(a, 0) == std::vector<double>{11, 22, 33});
    CHECK(wrap_diagonal(a, 1) == std::vector<double>{12, 23, 31});
    CHECK(wrap_diagonal(a, 2) == std::vector<double>{13, 21, 32});
    Matrix rect(2, 3);
    rect << 1, 2, 3, 4, 5, 6;
    CHECK(wrap_diagonal(rect, 1) == std::vector<double>{2, 6});
    CHECK_THROWS_AS(wrap_diagonal(a, 3), Error);
    CHECK_THROWS_AS(wrap_diagonal(a, -1), Error);
  }

  TEST_CASE("diagonal sparsity prefers the covering pattern") {
    const Matrix covering = mat3({0, 0, 1, 1, 0, 0, 0, 1, 0});
    const Matrix violating = mat3({0, 0, 1, 0, 0, 1, 1, 1, 0});
    CHECK(loss_diag(covering) == doctest::Approx(std::sqrt(3.0)));
    CHECK(loss_diag(violating) == doctest::Approx(2.0 * std::sqrt(2.0)));
    CHECK(loss_diag(violating) > loss_diag(covering));
    CHECK(loss_diag(Matrix::Zero(3, 3)) == 0.0);
  }

  TEST_CASE("norm term") {
    CHECK(loss_norm(Matrix::Identity(3, 3) / std::sqrt(3.0)) == doctest::Approx(0.0));
    CHECK(loss_norm(Matrix::Zero(3, 3)) == doctest::Approx(1.0));
    CHECK(loss_norm(Matrix::Identity(3, 3) * std::sqrt(3.0)) == doctest::Approx(4.0));
    CHECK(loss_norm(Matrix::Identity(2, 2), std::sqrt(2.0)) == doctest::Approx(0.0));
  }

  TEST_CASE("total is the weighted sum of the terms") {
    std::mt19937_64 rng(3);
    const Matrix v = oracle::random_matrix(rng, 3, 3, 0.0, 2.0);
    const Matrix lhat = oracle::random_matrix(rng, 3, 3);
    LossWeights w;
    w.count_temperature = 1.0;
    const LossBreakdown b = total_loss(v, lhat, w);
    CHECK(b.var == doctest::Approx(loss_var(v)));
    CHECK(b.env == doctest::Approx(loss_env(v)));
    CHECK(b.dim == doctest::Approx(loss_dim(v)));
    CHECK(b.diag == doctest::Approx(loss_diag(v)));
    CHECK(b.norm == doctest::Approx(loss_norm(lhat)));
    CHECK(b.total == doctest::Approx(b.var + b.env + b.dim + 10.0 * b.diag + 5.0 * b.norm));
    for (LossTerm t : kAllLossTerms) CHECK(b.term(t) == doctest::Approx(term_value(t, v, lhat, w)));

    LossWeights only_norm{0, 0, 0, 5, 1, 1};
    const LossBreakdown n = total_loss(v, lhat, only_norm);
    CHECK(n.total - n.var == doctest::Approx(5.0 * loss_norm(lhat)));

    LossWeights bad;
    bad.lambda_e = -1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = LossWeights{};
    bad.norm_target = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
  }

  TEST_CASE("environment order does not matter except through the diagonals") {
    std::mt19937_64 rng(4);
    LossWeights w;
    w.count_temperature = 1.0;
    for (int t = 0; t < 20; ++t) {
      const Matrix v = oracle::random_matrix(rng, 4, 4, 0.0, 2.0);
      const Matrix lhat = oracle::random_matrix(rng, 4, 4);
      Matrix swapped = v;
      swapped.row(0).swap(swapped.row(3));
      for (LossTerm term : {LossTerm::Var, LossTerm::Env, LossTerm::Dim, LossTerm::Norm}) {
        CHECK(term_value(term, swapped, lhat, w) == doctest::Approx(term_value(term, v, lhat, w)));
      }
      // A cyclic co-shift of rows and columns maps each wrap diagonal onto itself.
      Matrix shifted(4, 4);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) shifted((i + 1) % 4, (j + 1) % 4) = v(i, j);
      CHECK(loss_diag(shifted) == doctest::Approx(loss_diag(v)));
    }
  }

  TEST_CASE("batch covariance and variance matrix") {
    std::mt19937_64 rng(5);
    const Matrix x = oracle::random_matrix(rng, 500, 4, -2.0, 5.0);
    const Matrix cov = batch_covariance(x);
    const auto var = oracle::column_variance(x);
    for (int c = 0; c < 4; ++c) CHECK(cov(c, c) == doctest::Approx(var[c]).epsilon(1e-12));
    const Matrix lhat = oracle::random_matrix(rng, 4, 3);
    const Matrix v = variance_matrix_from_batches({x, x}, lhat);
    const auto projected = oracle::column_variance(oracle::naive_product(x, lhat));
    for (int k = 0; k < 3; ++k) CHECK(v(1, k) == doctest::Approx(projected[k]).epsilon(1e-10));

    Matrix constant = Matrix::Constant(64, 3, 0.1);
    const Matrix zero = variance_matrix_from_batches({constant}, lhat.topRows(3));
    CHECK(zero.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(batch_covariance(Matrix::Zero(1, 3)), Error);
    CHECK_THROWS_AS(variance_matrix({cov}, Matrix::Zero(3, 3)), Error);
  }

  TEST_CASE("variances of the example under true and identity unmixing") {
    const auto batches = example_batches(20000, 7);
    const Matrix truth = example_mixing().entries().inverse();
    const Matrix v_true = variance_matrix_from_batches(batches, truth);
    // First environment clamps z1 and z2, leaving only eta3 with unit variance.
    CHECK(v_true(0, 0) < 1e-12);
    CHECK(v_true(0, 1) < 1e-12);
    CHECK(v_true(0, 2) == doctest::Approx(1.0).epsilon(0.05));
    const Matrix v_id = variance_matrix_from_batches(batches, Matrix::Identity(3, 3));
    for (Eigen::Index e = 0; e < 3; ++e) {
      for (Eigen::Index k = 0; k < 3; ++k) {
        const double ms = batches[e].col(k).squaredNorm() / static_cast<double>(batches[e].rows());
        CHECK_FALSE(effectively_constant(v_id(e, k), ms));
      }
    }
    for (double temperature : {1.0, LossWeights{}.count_temperature, TrainConfig{}.final_count_temperature}) {
      CHECK(loss_var(v_true, temperature) < loss_var(v_id, temperature));
      // Any permutation and rescaling of the true unmixing keeps the advantage.
      Matrix permuted(3, 3);
      permuted << truth.col(2) * 0.5, truth.col(0) * -2.0, truth.col(1) * 1.5;
      CHECK(loss_var(variance_matrix_from_batches(batches, permuted), temperature) < loss_var(v_id, temperature));
    }
  }

  TEST_CASE("non-finite inputs are numerical errors") {
    Matrix cov = Matrix::Identity(2, 2);
    cov(0, 0) = std::nan("");
    CHECK_THROWS_AS(evaluate_loss({cov, Matrix::Identity(2, 2)}, Matrix::Identity(2, 2), LossWeights{}), Error);
    try {
      evaluate_loss({cov, Matrix::Identity(2, 2)}, Matrix::Identity(2, 2), LossWeights{});
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Numerical);
    }
  }
}
