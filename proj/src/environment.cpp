#include "varsparse/environment.hpp"

#include "varsparse/error.hpp"
#include "varsparse/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace varsparse {

InterventionRegime::InterventionRegime(std::vector<int> targets, std::vector<double> values) {
  if (targets.size() != values.size()) {
    fail(ErrorCode::InvalidArgument, "intervention has " + std::to_string(targets.size()) + " targets but " +
                                         std::to_string(values.size()) + " values");
  }
  std::vector<std::size_t> idx(targets.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return targets[a] < targets[b]; });
  targets_.reserve(idx.size());
  values_.reserve(idx.size());
  for (std::size_t k : idx) {
    if (!targets_.empty() && targets_.back() == targets[k]) {
      fail(ErrorCode::InvalidArgument, "duplicate intervention target " + std::to_string(targets[k]));
    }
    if (targets[k] < 0) fail(ErrorCode::InvalidArgument, "negative intervention target");
    if (!std::isfinite(values[k])) fail(ErrorCode::InvalidArgument, "intervention value must be finite");
    targets_.push_back(targets[k]);
    values_.push_back(values[k]);
  }
}

std::optional<double> InterventionRegime::value_for(int node) const {
  const auto it = std::lower_bound(targets_.begin(), targets_.end(), node);
  if (it == targets_.end() || *it != node) return std::nullopt;
  return values_[static_cast<std::size_t>(it - targets_.begin())];
}

EnvironmentSet::EnvironmentSet(int d, std::vector<InterventionRegime> regimes,
                               std::optional<std::vector<double>> weights)
    : d_(d), regimes_(std::move(regimes)), weights_(std::move(weights)) {
  if (d < 1) fail(ErrorCode::InvalidArgument, "environment set needs d >= 1");
  for (const auto& r : regimes_) {
    if (!r.targets().empty() && r.targets().back() >= d) {
      fail(ErrorCode::InvalidArgument, "intervention target " + std::to_string(r.targets().back()) +
                                           " outside [0," + std::to_string(d) + ")");
    }
  }
  if (weights_) {
    if (weights_->size() != regimes_.size()) fail(ErrorCode::InvalidArgument, "one weight per regime required");
    double total = 0.0;
    for (double w : *weights_) {
      if (!(w >= 0.0)) fail(ErrorCode::InvalidArgument, "environment weights must be nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) fail(ErrorCode::InvalidArgument, "environment weights must sum to 1");
  }
}

std::vector<double> EnvironmentSet::weights() const {
  if (weights_) return *weights_;
  return std::vector<double>(regimes_.size(), regimes_.empty() ? 0.0 : 1.0 / static_cast<double>(regimes_.size()));
}

std::vector<std::vector<int>> support_sets(const EnvironmentSet& envs) {
  std::vector<std::vector<int>> out;
  out.reserve(envs.size());
  for (const auto& r : envs.regimes()) {
    std::vector<int> s;
    for (int j = 0; j < envs.d(); ++j) {
      if (!r.value_for(j)) s.push_back(j);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string CoverageReport::describe() const {
  std::ostringstream os;
  if (passed) {
    os << "sufficient coverage: pass\n";
    return os.str();
  }
  os << "sufficient coverage: FAIL\n";
  for (const auto& v : violations) {
    os << "  node " << v.node << " is never clamped without also clamping {";
    for (std::size_t k = 0; k < v.missing.size(); ++k) os << (k ? "," : "") << v.missing[k];
    os << "}\n";
  }
  return os.str();
}

CoverageReport check_sufficient_coverage(int d, const std::vector<std::vector<int>>& supports) {
  CoverageReport report;
  for (int j = 0; j < d; ++j) {
    std::vector<bool> covered(d, false);
    for (const auto& s : supports) {
      if (std::find(s.begin(), s.end(), j) != s.end()) continue;
      for (int i : s) covered.at(i) = true;
    }
    CoverageViolation v{j, {}};
    for (int i = 0; i < d; ++i) {
      if (i != j && !covered[i]) v.missing.push_back(i);
    }
    if (!v.missing.empty()) {
      report.passed = false;
      report.violations.push_back(std::move(v));
    }
  }
  return report;
}

CoverageReport check_sufficient_coverage(const EnvironmentSet& envs) {
  const auto all = support_sets(envs);
  const auto w = envs.weights();
  std::vector<std::vector<int>> family;
  for (std::size_t e = 0; e < all.size(); ++e) {
    if (w[e] > 0.0) family.push_back(all[e]);
  }
  return check_sufficient_coverage(envs.d(), family);
}

namespace {

InterventionRegime clamp_nodes(const std::vector<int>& targets, Engine& engine) {
  std::vector<double> values;
  values.reserve(targets.size());
  for (std::size_t k = 0; k < targets.size(); ++k) values.push_back(uniform(engine, -2.0, 2.0));
  return InterventionRegime(targets, std::move(values));
}

}  // namespace

EnvironmentSet leave_one_out_design(int d, std::uint64_t value_seed) {
  if (d < 2) fail(ErrorCode::InvalidArgument, "leave-one-out design needs d >= 2; no design covers d = 1");
  Engine engine(derive_seed(value_seed, Stream::Design));
  std::vector<InterventionRegime> regimes;
  for (int free_node = 0; free_node < d; ++free_node) {
    std::vector<int> targets;
    for (int i = 0; i < d; ++i) {
      if (i != free_node) targets.push_back(i);
    }
    regimes.push_back(clamp_nodes(targets, engine));
  }
  return EnvironmentSet(d, std::move(regimes));
}

EnvironmentSet separating_design(int d, std::uint64_t value_seed) {
  if (d < 2) fail(ErrorCode::InvalidArgument, "separating design needs d >= 2");
  Engine engine(derive_seed(value_seed, Stream::Design));
  int bits = 0;
  while ((1 << bits) < d) ++bits;
  std::vector<InterventionRegime> regimes;
  for (int b = 0; b < bits; ++b) {
    for (int want : {1, 0}) {
      std::vector<int> targets;
      for (int i = 0; i < d; ++i) {
        if (((i >> b) & 1) == want) targets.push_back(i);
      }
      if (targets.empty() || static_cast<int>(targets.size()) == d) continue;
      regimes.push_back(clamp_nodes(targets, engine));
    }
  }
  return EnvironmentSet(d, std::move(regimes));
}

nlohmann::json to_json(const EnvironmentSet& envs) {
  nlohmann::json regimes = nlohmann::json::array();
  for (const auto& r : envs.regimes()) {
    regimes.push_back({{"targets", r.targets()}, {"values", r.values()}});
  }
  nlohmann::json doc{{"d", envs.d()}, {"regimes", regimes}};
  if (envs.has_explicit_weights()) doc["weights"] = envs.weights();
  return doc;
}

EnvironmentSet environment_set_from_json(const nlohmann::json& doc) {
  try {
    const int d = doc.at("d").get<int>();
    std::vector<InterventionRegime> regimes;
    for (const auto& r : doc.at("regimes")) {
      regimes.emplace_back(r.at("targets").get<std::vector<int>>(), r.at("values").get<std::vector<double>>());
    }
    std::optional<std::vector<double>> weights;
    if (doc.contains("weights")) weights = doc.at("weights").get<std::vector<double>>();
    return EnvironmentSet(d, std::move(regimes), std::move(weights));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("malformed environment set: ") + e.what());
  }
}

EnvironmentSet load_environment_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open design file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, "design file " + path + " is not valid JSON: " + e.what());
  }
  return environment_set_from_json(doc);
}

void save_environment_set(const EnvironmentSet& envs, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write design file " + path);
  out << to_json(envs).dump(2) << '\n';
}

}  // namespace varsparse
