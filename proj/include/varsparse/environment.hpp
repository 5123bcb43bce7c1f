#pragma once

// Interventional environments: which latent nodes each environment clamps,
// the coverage condition a collection of environments has to meet, and two
// constructions that meet it.

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace varsparse {

/// One hard intervention do(Z_t = a_t for t in targets). Stored sorted by
/// target; values are paired with targets.
class InterventionRegime {
 public:
  InterventionRegime() = default;
  InterventionRegime(std::vector<int> targets, std::vector<double> values);

  const std::vector<int>& targets() const noexcept { return targets_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Clamped value for `node`, if the regime targets it.
  std::optional<double> value_for(int node) const;

 private:
  std::vector<int> targets_;
  std::vector<double> values_;
};

class EnvironmentSet {
 public:
  EnvironmentSet(int d, std::vector<InterventionRegime> regimes,
                 std::optional<std::vector<double>> weights = std::nullopt);

  int d() const noexcept { return d_; }
  std::size_t size() const noexcept { return regimes_.size(); }
  const std::vector<InterventionRegime>& regimes() const noexcept { return regimes_; }
  const InterventionRegime& regime(std::size_t e) const { return regimes_.at(e); }

  /// Environment probabilities; uniform when none were given.
  std::vector<double> weights() const;
  bool has_explicit_weights() const noexcept { return weights_.has_value(); }

 private:
  int d_;
  std::vector<InterventionRegime> regimes_;
  std::optional<std::vector<double>> weights_;
};

/// Per regime, the nodes that keep nonzero variance: [d] minus the targets.
std::vector<std::vector<int>> support_sets(const EnvironmentSet& envs);

struct CoverageViolation {
  int node = 0;
  std::vector<int> missing;  ///< nodes never left free while `node` is clamped
};

struct CoverageReport {
  bool passed = true;
  std::vector<CoverageViolation> violations;

  std::string describe() const;
};

/// For every j, the union of all supports that exclude j must be [d] \ {j}.
/// Supports of zero-weight regimes are not part of the support family.
CoverageReport check_sufficient_coverage(const EnvironmentSet& envs);
CoverageReport check_sufficient_coverage(int d, const std::vector<std::vector<int>>& supports);

/// d regimes; regime j clamps every node except j.
EnvironmentSet leave_one_out_design(int d, std::uint64_t value_seed);

/// Binary-label construction: for each bit b of the node index, one regime
/// clamps the nodes whose bit is 1 and one clamps those whose bit is 0.
/// Uses at most 2*ceil(log2 d) regimes.
EnvironmentSet separating_design(int d, std::uint64_t value_seed);

nlohmann::json to_json(const EnvironmentSet& envs);
EnvironmentSet environment_set_from_json(const nlohmann::json& doc);

EnvironmentSet load_environment_set(const std::string& path);
void save_environment_set(const EnvironmentSet& envs, const std::string& path);

}  // namespace varsparse
