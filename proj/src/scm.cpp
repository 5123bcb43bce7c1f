#include "varsparse/scm.hpp"

#include "varsparse/error.hpp"
#include "varsparse/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace varsparse {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// Domain guards for the sinusoidal model: sqrt/log arguments are floored and
// the exponent is clamped so samples stay finite.
constexpr double kDomainFloor = 1e-6;
constexpr double kExponentClamp = 20.0;

double sinusoidal_equation(int node, std::span<const double> z, double noise) {
  switch (node) {
    case 0:
      return noise;
    case 1:
      return std::sin(z[0]) + noise;
    case 2:
      return std::sqrt(std::max(z[0] + z[1], kDomainFloor)) + noise;
    case 3:
      return std::log(std::max(z[0] * z[0] + z[1], kDomainFloor)) + z[2] * z[2] + noise;
    case 4:
      return z[2] * std::cos(z[0]) + std::atan(z[3]) + noise;
    case 5: {
      double exponent = z[3] * z[3] / z[4];
      if (std::isnan(exponent)) exponent = 0.0;  // 0/0
      exponent = std::clamp(exponent, -kExponentClamp, kExponentClamp);
      return z[1] * z[2] * std::exp(exponent) + noise;
    }
    default:
      fail(ErrorCode::InvalidArgument, "sinusoidal model has nodes 0..5, got " + std::to_string(node));
  }
}

}  // namespace

Mechanism::Mechanism(Kind kind) : kind_(std::move(kind)) {
  if (const auto* lin = std::get_if<LinearMechanism>(&kind_)) {
    if (lin->parents.size() != lin->coefficients.size()) {
      fail(ErrorCode::InvalidArgument, "linear mechanism needs one coefficient per parent");
    }
  }
}

const std::vector<int>& Mechanism::parents() const noexcept {
  return std::visit([](const auto& m) -> const std::vector<int>& { return m.parents; }, kind_);
}

double Mechanism::evaluate(std::span<const double> z, double noise) const {
  return std::visit(
      overloaded{
          [&](const LinearMechanism& m) {
            double acc = noise;
            for (std::size_t k = 0; k < m.parents.size(); ++k) acc += m.coefficients[k] * z[m.parents[k]];
            return acc;
          },
          [&](const QuadraticSumMechanism& m) {
            double acc = noise;
            for (int p : m.parents) acc += z[p] * z[p];
            return acc;
          },
          [&](const SinusoidalMechanism& m) { return sinusoidal_equation(m.node, z, noise); },
      },
      kind_);
}

Scm::Scm(DagAdjacency dag, std::vector<Mechanism> mechanisms, std::vector<GaussianNoise> noise)
    : dag_(std::move(dag)), mechanisms_(std::move(mechanisms)), noise_(std::move(noise)) {
  const int d = dag_.size();
  if (static_cast<int>(mechanisms_.size()) != d || static_cast<int>(noise_.size()) != d) {
    fail(ErrorCode::InvalidArgument, "SCM needs one mechanism and one noise term per node");
  }
  for (int j = 0; j < d; ++j) {
    if (mechanisms_[j].parents() != dag_.parents(j)) {
      fail(ErrorCode::InvalidArgument, "mechanism parents of node " + std::to_string(j) + " disagree with the DAG");
    }
    if (!(noise_[j].variance > 0.0) || !std::isfinite(noise_[j].variance) || !std::isfinite(noise_[j].mean)) {
      fail(ErrorCode::InvalidArgument, "noise variance of node " + std::to_string(j) + " must be positive");
    }
  }
  auto order = dag_.topological_order();
  if (!order) fail(ErrorCode::InvalidArgument, "SCM graph is cyclic");
  topo_order_ = std::move(*order);
}

Scm linear_scm(const DagAdjacency& dag, const Matrix& weights, std::vector<GaussianNoise> noise) {
  const int d = dag.size();
  if (weights.rows() != d || weights.cols() != d) fail(ErrorCode::InvalidArgument, "weight matrix must be d x d");
  std::vector<Mechanism> mechanisms;
  for (int j = 0; j < d; ++j) {
    LinearMechanism m;
    m.parents = dag.parents(j);
    for (int p : m.parents) m.coefficients.push_back(weights(p, j));
    mechanisms.emplace_back(std::move(m));
  }
  return Scm(dag, std::move(mechanisms), std::move(noise));
}

Scm sample_linear_scm(const DagAdjacency& dag, std::uint64_t seed) {
  const int d = dag.size();
  Engine engine(derive_seed(seed, Stream::Coefficients));
  Matrix weights = Matrix::Zero(d, d);
  for (const auto& [i, j] : dag.edges()) weights(i, j) = uniform(engine, -0.1, 1.0);
  return linear_scm(dag, weights, std::vector<GaussianNoise>(d, GaussianNoise{0.0, 0.1}));
}

DagAdjacency builtin_nonlinear_dag() {
  return DagAdjacency::from_edges(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4},
                                      {1, 2}, {1, 3}, {1, 5},
                                      {2, 3}, {2, 4}, {2, 5},
                                      {3, 4}, {3, 5},
                                      {4, 5}});
}

Scm builtin_nonlinear_scm(int which) {
  if (which != 1 && which != 2) {
    fail(ErrorCode::InvalidArgument, "built-in nonlinear SCM must be 1 or 2, got " + std::to_string(which));
  }
  DagAdjacency dag = builtin_nonlinear_dag();
  std::vector<Mechanism> mechanisms;
  for (int j = 0; j < 6; ++j) {
    if (which == 1) {
      mechanisms.emplace_back(QuadraticSumMechanism{dag.parents(j)});
    } else {
      mechanisms.emplace_back(SinusoidalMechanism{j, dag.parents(j)});
    }
  }
  return Scm(std::move(dag), std::move(mechanisms), std::vector<GaussianNoise>(6, GaussianNoise{0.0, 0.1}));
}

Matrix sample(const Scm& scm, std::size_t n, const std::optional<InterventionRegime>& intervention,
              std::uint64_t seed) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "sample size must be >= 1");
  const int d = scm.d();
  std::vector<std::optional<double>> clamp(d);
  if (intervention) {
    for (std::size_t k = 0; k < intervention->targets().size(); ++k) {
      const int t = intervention->targets()[k];
      if (t >= d) fail(ErrorCode::InvalidArgument, "intervention target " + std::to_string(t) + " outside the SCM");
      clamp[t] = intervention->values()[k];
    }
  }
  const CounterRng rng(derive_seed(seed, Stream::Samples));
  std::vector<double> stddev(d);
  for (int j = 0; j < d; ++j) stddev[j] = std::sqrt(scm.noise(j).variance);

  Matrix out(static_cast<Eigen::Index>(n), d);
  for (std::size_t r = 0; r < n; ++r) {
    double* row = out.data() + r * d;
    const std::span<const double> z(row, static_cast<std::size_t>(d));
    for (int j : scm.topo_order()) {
      if (clamp[j]) {
        row[j] = *clamp[j];
        continue;
      }
      const double eta = scm.noise(j).mean + stddev[j] * rng.normal(static_cast<std::uint64_t>(j), r);
      row[j] = scm.mechanism(j).evaluate(z, eta);
    }
  }
  return out;
}

}  // namespace varsparse
