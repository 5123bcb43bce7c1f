#include "doctest.h"
#include "oracles.hpp"

#include "varsparse/environment.hpp"
#include "varsparse/error.hpp"

#include <cmath>
#include <filesystem>

using namespace varsparse;

namespace {

std::vector<std::set<int>> as_sets(const std::vector<std::vector<int>>& supports) {
  std::vector<std::set<int>> out;
  for (const auto& s : supports) out.emplace_back(s.begin(), s.end());
  return out;
}

int ceil_log2(int d) {
  int bits = 0;
  while ((1 << bits) < d) ++bits;
  return bits;
}

}  // namespace

TEST_SUITE("environment") {
  TEST_CASE("support sets are complements of targets") {
    const EnvironmentSet three(3, {InterventionRegime({0, 1}, {1, 1}), InterventionRegime({}, {})});
    const auto s = support_sets(three);
    CHECK(s[0] == std::vector<int>{2});
    CHECK(s[1] == std::vector<int>{0, 1, 2});
    const EnvironmentSet four(4, {InterventionRegime({0, 2}, {0.5, -0.5})});
    CHECK(support_sets(four)[0] == std::vector<int>{1, 3});
  }

  TEST_CASE("regime and set validation") {
    CHECK_THROWS_AS(InterventionRegime({1, 1}, {0, 0}), Error);
    CHECK_THROWS_AS(InterventionRegime({-1}, {0}), Error);
    CHECK_THROWS_AS(EnvironmentSet(2, {InterventionRegime({2}, {0})}), Error);
    CHECK_THROWS_AS(EnvironmentSet(2, {InterventionRegime({0}, {0})}, std::vector<double>{0.5}), Error);
    CHECK_THROWS_AS(EnvironmentSet(2, {InterventionRegime({0}, {0}), InterventionRegime({1}, {0})},
                                   std::vector<double>{0.7, 0.7}),
                    Error);
    const EnvironmentSet uniform(2, {InterventionRegime({0}, {0}), InterventionRegime({1}, {0})});
    CHECK(uniform.weights() == std::vector<double>{0.5, 0.5});
    const InterventionRegime r({2, 0}, {3.0, 1.0});
    CHECK(r.targets() == std::vector<int>{0, 2});
    CHECK(*r.value_for(2) == 3.0);
    CHECK_FALSE(r.value_for(1).has_value());
  }

  TEST_CASE("coverage examples") {
    const auto bad = check_sufficient_coverage(3, {{2}, {2}, {0, 1}});
    CHECK_FALSE(bad.passed);
    REQUIRE(bad.violations.size() == 2);
    CHECK(bad.violations[0].node == 0);
    CHECK(bad.violations[0].missing == std::vector<int>{1});
    CHECK(bad.violations[1].node == 1);
    CHECK(bad.violations[1].missing == std::vector<int>{0});
    CHECK(check_sufficient_coverage(3, {{2}, {0}, {1}}).passed);
  }

  TEST_CASE("checker agrees with the set equation on every collection for d <= 4") {
    for (int d = 1; d <= 4; ++d) {
      const int subsets = 1 << d;
      // Every collection of distinct subsets; duplicates do not change unions.
      const long collections = 1L << subsets;
      for (long mask = 0; mask < collections; ++mask) {
        std::vector<std::vector<int>> supports;
        for (int s = 0; s < subsets; ++s) {
          if (!(mask >> s & 1)) continue;
          std::vector<int> set;
          for (int j = 0; j < d; ++j)
            if (s >> j & 1) set.push_back(j);
          supports.push_back(set);
        }
        const bool want = oracle::coverage_holds(d, as_sets(supports));
        const auto report = check_sufficient_coverage(d, supports);
        REQUIRE(report.passed == want);
        REQUIRE(report.violations.empty() == want);
      }
    }
  }

  TEST_CASE("a node clamped everywhere fails at that node") {
    const auto report = check_sufficient_coverage(3, {{1, 2}, {1}, {2}});
    CHECK_FALSE(report.passed);
    // Node 0 never varies, so it is missing from every other node's union.
    bool found = false;
    for (const auto& v : report.violations)
      found = found || std::find(v.missing.begin(), v.missing.end(), 0) != v.missing.end();
    CHECK(found);
  }

  TEST_CASE("adding regimes never breaks a passing design") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::vector<int>> supports = {{0}, {1}, {2}, {3}};
      for (int extra = 0; extra < 3; ++extra) {
        std::vector<int> s;
        for (int j = 0; j < 4; ++j)
          if (rng() & 1) s.push_back(j);
        supports.push_back(s);
        CHECK(check_sufficient_coverage(4, supports).passed);
      }
    }
  }

  TEST_CASE("zero-weight regimes do not count toward coverage") {
    const EnvironmentSet envs(2, {InterventionRegime({0}, {1}), InterventionRegime({1}, {1})},
                              std::vector<double>{1.0, 0.0});
    CHECK_FALSE(check_sufficient_coverage(envs).passed);
  }

  TEST_CASE("leave-one-out design") {
    CHECK(support_sets(leave_one_out_design(3, 0)) == std::vector<std::vector<int>>{{0}, {1}, {2}});
    CHECK(support_sets(leave_one_out_design(2, 0)) == std::vector<std::vector<int>>{{0}, {1}});
    for (int d = 2; d <= 30; ++d) {
      const EnvironmentSet envs = leave_one_out_design(d, d);
      CHECK(envs.size() == static_cast<std::size_t>(d));
      CHECK(check_sufficient_coverage(envs).passed);
      for (const auto& r : envs.regimes())
        for (double v : r.values()) {
          CHECK(v >= -2.0);
          CHECK(v <= 2.0);
        }
    }
    CHECK_THROWS_AS(leave_one_out_design(1, 0), Error);
    CHECK(to_json(leave_one_out_design(5, 3)) == to_json(leave_one_out_design(5, 3)));
  }

  TEST_CASE("separating design") {
    const EnvironmentSet four = separating_design(4, 0);
    REQUIRE(four.size() == 4);
    CHECK(four.regime(0).targets() == std::vector<int>{1, 3});
    CHECK(four.regime(1).targets() == std::vector<int>{0, 2});
    CHECK(four.regime(2).targets() == std::vector<int>{2, 3});
    CHECK(four.regime(3).targets() == std::vector<int>{0, 1});
    const EnvironmentSet two = separating_design(2, 0);
    REQUIRE(two.size() == 2);
    CHECK(two.regime(0).targets() == std::vector<int>{1});
    CHECK(two.regime(1).targets() == std::vector<int>{0});
    CHECK(separating_design(16, 0).size() == 8);
    std::size_t previous = 0;
    for (int d = 2; d <= 64; ++d) {
      const EnvironmentSet envs = separating_design(d, 1);
      CHECK(envs.size() <= static_cast<std::size_t>(2 * ceil_log2(d)));
      CHECK(envs.size() >= previous);
      previous = envs.size();
      CHECK(check_sufficient_coverage(envs).passed);
      CHECK(oracle::coverage_holds(d, as_sets(support_sets(envs))));
    }
    CHECK_THROWS_AS(separating_design(1, 0), Error);
  }

  TEST_CASE("JSON round trip and malformed input") {
    const EnvironmentSet envs(3, {InterventionRegime({0, 1}, {1, 1}), InterventionRegime({2}, {0.25})},
                              std::vector<double>{0.25, 0.75});
    const EnvironmentSet back = environment_set_from_json(to_json(envs));
    CHECK(to_json(back) == to_json(envs));
    CHECK(back.has_explicit_weights());

    const auto path = std::filesystem::temp_directory_path() / "varsparse_design_test.json";
    save_environment_set(envs, path.string());
    CHECK(to_json(load_environment_set(path.string())) == to_json(envs));
    std::filesystem::remove(path);

    CHECK_THROWS_AS(environment_set_from_json(nlohmann::json{{"regimes", nlohmann::json::array()}}), Error);
    CHECK_THROWS_AS(environment_set_from_json(nlohmann::json::parse(R"({"d":2,"regimes":[{"targets":[3],"values":[1]}]})")),
                    Error);
    CHECK_THROWS_AS(load_environment_set("/nonexistent/design.json"), Error);
  }
}
