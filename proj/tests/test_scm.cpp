#include "doctest.h"
#include "oracles.hpp"

#include "varsparse/error.hpp"
#include "varsparse/experiment.hpp"
#include "varsparse/losses.hpp"
#include "varsparse/scm.hpp"

#include <cmath>

using namespace varsparse;

TEST_SUITE("scm") {
  TEST_CASE("ER extremes") {
    for (std::uint64_t seed : {0u, 1u, 99u}) {
      CHECK(sample_er_dag(6, 0.0, seed).edge_count() == 0);
      CHECK(sample_er_dag(6, 1.0, seed).edge_count() == 15);
    }
    CHECK_THROWS_AS(sample_er_dag(4, 1.5, 0), Error);
    CHECK_THROWS_AS(sample_er_dag(4, -0.1, 0), Error);
  }

  TEST_CASE("ER edge fraction over many seeds") {
    long edges = 0;
    const int seeds = 10000;
    for (int s = 0; s < seeds; ++s) edges += sample_er_dag(10, 0.5, s).edge_count();
    const double fraction = static_cast<double>(edges) / (seeds * 45.0);
    CHECK(std::abs(fraction - 0.5) < 0.02);
  }

  TEST_CASE("sampled graphs are acyclic without self loops") {
    for (int s = 0; s < 200; ++s) {
      const DagAdjacency g = sample_er_dag(8, 0.6, s);
      REQUIRE(g.topological_order().has_value());
      const auto order = *g.topological_order();
      std::vector<int> pos(8);
      for (int i = 0; i < 8; ++i) pos[order[i]] = i;
      for (const auto& [i, j] : g.edges()) CHECK(pos[i] < pos[j]);
      for (int j = 0; j < 8; ++j) CHECK_FALSE(g.has_edge(j, j));
    }
  }

  TEST_CASE("from_edges rejects cycles and self loops") {
    CHECK_THROWS_AS(DagAdjacency::from_edges(3, {{0, 1}, {1, 2}, {2, 0}}), Error);
    CHECK_THROWS_AS(DagAdjacency::from_edges(3, {{1, 1}}), Error);
    CHECK_THROWS_AS(DagAdjacency::from_edges(3, {{0, 3}}), Error);
  }

  TEST_CASE("linear SCM coefficients and roots") {
    for (int s = 0; s < 1000; ++s) {
      const Scm scm = sample_linear_scm(sample_er_dag(5, 0.7, s), s);
      for (int j = 0; j < 5; ++j) {
        const auto& lin = std::get<LinearMechanism>(scm.mechanism(j).kind());
        CHECK(lin.parents == scm.dag().parents(j));
        for (double a : lin.coefficients) {
          CHECK(a >= -0.1);
          CHECK(a <= 1.0);
        }
        CHECK(scm.noise(j).variance == 0.1);
      }
    }
  }

  TEST_CASE("empty graph samples are i.i.d. noise") {
    const Scm scm = sample_linear_scm(sample_er_dag(3, 0.0, 0), 0);
    const Matrix z = sample(scm, 100000, std::nullopt, 11);
    const auto var = oracle::column_variance(z);
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(z.col(j).mean()) < 0.01);
      CHECK(var[j] == doctest::Approx(0.1).epsilon(0.03));
    }
    CHECK(std::abs((z.col(0).array() * z.col(1).array()).mean()) < 0.005);
  }

  TEST_CASE("observational variance of the three-node example") {
    // Z3 = Z1 + Z2 + e3 = 2 e1 + e2 + e3, so Var(Z3) = 4 + 1 + 1.
    const Matrix z = sample(example_scm(), 100000, std::nullopt, 3);
    const auto var = oracle::column_variance(z);
    CHECK(var[2] == doctest::Approx(6.0).epsilon(0.05));
    CHECK(var[1] == doctest::Approx(2.0).epsilon(0.05));
  }

  TEST_CASE("hard interventions clamp targets exactly") {
    const Scm scm = example_scm();
    const InterventionRegime reg({0, 1}, {1.0, 1.0});
    const Matrix z = sample(scm, 10000, reg, 5);
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      CHECK(z(r, 0) == 1.0);
      CHECK(z(r, 1) == 1.0);
    }
    const auto var = oracle::column_variance(z);
    CHECK(batch_covariance(z)(0, 0) == 0.0);
    CHECK(batch_covariance(z)(1, 1) == 0.0);
    CHECK(var[2] == doctest::Approx(1.0).epsilon(0.05));
    CHECK(z.col(2).mean() == doctest::Approx(2.0).epsilon(0.02));
  }

  TEST_CASE("non-intervened nodes keep variance") {
    for (int s = 0; s < 20; ++s) {
      const Scm scm = sample_linear_scm(sample_er_dag(6, 0.5, s), s);
      const EnvironmentSet envs = leave_one_out_design(6, s);
      for (std::size_t e = 0; e < envs.size(); ++e) {
        const Matrix z = sample(scm, 500, envs.regime(e), s);
        const auto var = oracle::column_variance(z);
        for (int j = 0; j < 6; ++j) {
          if (envs.regime(e).value_for(j)) {
            CHECK((z.col(j).array() == *envs.regime(e).value_for(j)).all());
            CHECK(batch_covariance(z)(j, j) == 0.0);
          } else {
            CHECK(var[j] > 1e-3);
          }
        }
      }
    }
  }

  TEST_CASE("sampling is deterministic and seed sensitive") {
    const Scm scm = sample_linear_scm(sample_er_dag(4, 0.5, 1), 1);
    const Matrix a = sample(scm, 1000, std::nullopt, 8);
    const Matrix b = sample(scm, 1000, std::nullopt, 8);
    const Matrix c = sample(scm, 1000, std::nullopt, 9);
    CHECK(a == b);
    CHECK(a != c);
  }

  TEST_CASE("intervention with an out-of-range target is rejected") {
    const Scm scm = example_scm();
    CHECK_THROWS_AS(sample(scm, 10, InterventionRegime({5}, {1.0}), 0), Error);
    CHECK_THROWS_AS(InterventionRegime({0, 1}, {1.0}), Error);
  }

  TEST_CASE("built-in nonlinear equations") {
    const Scm one = builtin_nonlinear_scm(1);
    const Scm two = builtin_nonlinear_scm(2);
    std::vector<double> z(6, 0.0);
    z[0] = 2.0;
    CHECK(one.mechanism(1).evaluate(z, 0.0) == doctest::Approx(4.0));
    z[0] = 0.0;
    CHECK(two.mechanism(1).evaluate(z, 0.0) == doctest::Approx(0.0));
    z = {1.0, 1.0, 2.0, 0.0, 0.0, 0.0};
    CHECK(two.mechanism(3).evaluate(z, 0.0) == doctest::Approx(std::log(2.0) + 4.0).epsilon(1e-12));
    CHECK_THROWS_AS(builtin_nonlinear_scm(3), Error);

    const DagAdjacency g = builtin_nonlinear_dag();
    CHECK(g.edge_count() == 13);
    CHECK(g.parents(5) == std::vector<int>{1, 2, 3, 4});
    CHECK(g.parents(1) == std::vector<int>{0});
  }

  TEST_CASE("nonlinear samples stay finite under every leave-one-out regime") {
    for (int which : {1, 2}) {
      const Scm scm = builtin_nonlinear_scm(which);
      const EnvironmentSet envs = leave_one_out_design(6, 0);
      for (std::size_t e = 0; e < envs.size(); ++e) CHECK(all_finite(sample(scm, 20000, envs.regime(e), 1)));
      CHECK(all_finite(sample(scm, 20000, std::nullopt, 1)));
    }
  }
}
