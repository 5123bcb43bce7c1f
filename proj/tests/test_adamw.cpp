#include "doctest.h"

#include "varsparse/adamw.hpp"
#include "varsparse/error.hpp"

using namespace varsparse;

TEST_SUITE("adamw") {
  TEST_CASE("zero gradient only decays") {
    AdamW opt(2, 2, AdamWConfig{});
    Matrix theta(2, 2);
    theta << 1.0, -2.0, 0.25, 4.0;
    const Matrix start = theta;
    opt.step(theta, Matrix::Zero(2, 2));
    const double factor = 1.0 - 2e-3 * 1e-2;
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(theta.data()[i] == start.data()[i] * factor);
  }

  TEST_CASE("first step from zero state") {
    AdamW opt(1, 3, AdamWConfig{});
    Matrix theta(1, 3);
    theta << 0.5, -1.0, 0.0;
    const Matrix start = theta;
    opt.step(theta, Matrix::Ones(1, 3));
    for (Eigen::Index i = 0; i < 3; ++i) {
      const double want = -2e-3 * (1.0 / (1.0 + 1e-8)) - 2e-3 * 1e-2 * start(0, i);
      CHECK(theta(0, i) - start(0, i) == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK(opt.steps() == 1);
  }

  TEST_CASE("two-step trace") {
    AdamWConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.weight_decay = 0.1;
    AdamW opt(2, 2, cfg);
    Matrix theta(2, 2), g1(2, 2), g2(2, 2);
    theta << 1.0, -2.0, 0.5, 0.0;
    g1 << 0.1, -0.2, 0.3, 0.0;
    g2 << 0.05, 0.1, -0.3, 1.0;
    opt.step(theta, g1);
    CHECK(theta(0, 0) == doctest::Approx(0.890000009999999).epsilon(1e-13));
    CHECK(theta(0, 1) == doctest::Approx(-1.8800000049999996).epsilon(1e-13));
    CHECK(theta(1, 0) == doctest::Approx(0.3950000033333332).epsilon(1e-13));
    CHECK(theta(1, 1) == 0.0);
    opt.step(theta, g2);
    CHECK(theta(0, 0) == doctest::Approx(0.7878820578118706).epsilon(1e-13));
    CHECK(theta(0, 1) == doctest::Approx(-1.8345663026686758).epsilon(1e-13));
    CHECK(theta(1, 0) == doctest::Approx(0.39631316101929803).epsilon(1e-13));
    CHECK(theta(1, 1) == doctest::Approx(-0.07441368130459296).epsilon(1e-13));
  }

  TEST_CASE("validation") {
    AdamWConfig bad;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = AdamWConfig{};
    bad.beta2 = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    AdamW opt(2, 2, AdamWConfig{});
    Matrix theta = Matrix::Zero(2, 3);
    CHECK_THROWS_AS(opt.step(theta, Matrix::Zero(2, 3)), Error);
  }
}
