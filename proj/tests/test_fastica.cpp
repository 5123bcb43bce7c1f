#include "doctest.h"
#include "oracles.hpp"

#include "varsparse/error.hpp"
#include "varsparse/experiment.hpp"
#include "varsparse/fastica.hpp"
#include "varsparse/metrics.hpp"

#include <cmath>

using namespace varsparse;

namespace {

Matrix uniform_sources(std::uint64_t seed, Eigen::Index n, Eigen::Index d) {
  std::mt19937_64 rng(seed);
  return oracle::random_matrix(rng, n, d, -1.0, 1.0);
}

}  // namespace

TEST_SUITE("fastica") {
  TEST_CASE("recovers two uniform sources") {
    const Matrix s = uniform_sources(1, 100000, 2);
    std::mt19937_64 rng(2);
    const Matrix x = s * oracle::random_matrix(rng, 2, 2);
    const IcaModel model = fit_fastica(x, 2, IcaConfig{});
    CHECK(model.converged);
    CHECK(mcc_score(s, transform(model, x)) >= 0.95);
  }

  TEST_CASE("rotation is orthogonal and components are white") {
    const Matrix s = uniform_sources(3, 100000, 4);
    std::mt19937_64 rng(4);
    const Matrix x = s * oracle::random_matrix(rng, 4, 4);
    const IcaModel model = fit_fastica(x, 4, IcaConfig{});
    CHECK((model.rotation * model.rotation.transpose() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-6);
    const Matrix y = transform(model, x);
    const auto var = oracle::column_variance(y);
    for (double v : var) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
    const CorrelationMatrix c = pearson(y, y);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) CHECK(std::abs(c.c(i, j)) < 1e-3);
  }

  TEST_CASE("already white input needs no whitening beyond a rotation") {
    const Matrix s = uniform_sources(5, 100000, 3) * std::sqrt(3.0);
    const IcaModel model = fit_fastica(s, 3, IcaConfig{});
    const Matrix w = model.whitening;
    CHECK((w.transpose() * w - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.05);
  }

  TEST_CASE("mean row maps to zero and reconstruction is exact") {
    const Matrix s = uniform_sources(6, 5000, 3);
    std::mt19937_64 rng(7);
    const Matrix x = s * oracle::random_matrix(rng, 3, 3);
    const IcaModel model = fit_fastica(x, 3, IcaConfig{});
    const Matrix mean_row = model.mean.transpose();
    CHECK(transform(model, mean_row).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((inverse_transform(model, transform(model, x)) - x).cwiseAbs().maxCoeff() < 1e-6);
  }

  TEST_CASE("deterministic and invariant to column scaling") {
    const Matrix s = uniform_sources(8, 20000, 3);
    std::mt19937_64 rng(9);
    const Matrix x = s * oracle::random_matrix(rng, 3, 3);
    IcaConfig cfg;
    cfg.seed = 4;
    const Matrix a = transform(fit_fastica(x, 3, cfg), x);
    CHECK(a == transform(fit_fastica(x, 3, cfg), x));
    Matrix scaled = x;
    scaled.col(0) *= 10.0;
    scaled.col(2) *= 0.1;
    const Matrix b = transform(fit_fastica(scaled, 3, cfg), scaled);
    CHECK(mcc_score(a, b) > 0.999);
  }

  TEST_CASE("errors") {
    const Matrix s = uniform_sources(10, 3, 3);
    CHECK_THROWS_AS(fit_fastica(s, 3, IcaConfig{}), Error);
    Matrix rank_deficient = uniform_sources(11, 1000, 3);
    rank_deficient.col(2) = rank_deficient.col(0) * 2.0;
    try {
      fit_fastica(rank_deficient, 3, IcaConfig{});
      FAIL("rank-deficient input accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Numerical);
    }
  }

  TEST_CASE("gaussian sources defeat the baseline") {
    DataConfig dc;
    dc.d = 6;
    dc.p = 0.0;
    const GeneratedData g = generate_from_config(dc);
    const double ica = evaluate_fastica(g.dataset, IcaConfig{}).score;
    CHECK(ica < 0.85);
  }
}
