#include "varsparse/dag.hpp"

#include "varsparse/error.hpp"
#include "varsparse/rng.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace varsparse {

DagAdjacency::DagAdjacency(int d) : d_(d) {
  if (d < 1) fail(ErrorCode::InvalidArgument, "DAG needs at least one node, got d=" + std::to_string(d));
  adj_.assign(static_cast<std::size_t>(d) * static_cast<std::size_t>(d), 0);
}

DagAdjacency DagAdjacency::from_edges(int d, const std::vector<std::pair<int, int>>& edges) {
  DagAdjacency dag(d);
  for (const auto& [from, to] : edges) dag.set_edge(from, to);
  if (!dag.topological_order()) fail(ErrorCode::InvalidArgument, "edge list contains a cycle");
  return dag;
}

void DagAdjacency::set_edge(int from, int to) {
  if (from < 0 || to < 0 || from >= d_ || to >= d_) {
    fail(ErrorCode::InvalidArgument, "edge (" + std::to_string(from) + "," + std::to_string(to) + ") out of range");
  }
  if (from == to) fail(ErrorCode::InvalidArgument, "self-loop at node " + std::to_string(from));
  adj_[static_cast<std::size_t>(from) * d_ + to] = 1;
}

bool DagAdjacency::has_edge(int from, int to) const {
  return adj_[static_cast<std::size_t>(from) * d_ + to] != 0;
}

std::size_t DagAdjacency::edge_count() const noexcept {
  return static_cast<std::size_t>(std::count(adj_.begin(), adj_.end(), std::uint8_t{1}));
}

std::vector<int> DagAdjacency::parents(int j) const {
  std::vector<int> out;
  for (int i = 0; i < d_; ++i) {
    if (has_edge(i, j)) out.push_back(i);
  }
  return out;
}

std::vector<std::pair<int, int>> DagAdjacency::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < d_; ++i) {
    for (int j = 0; j < d_; ++j) {
      if (has_edge(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

std::optional<std::vector<int>> DagAdjacency::topological_order() const {
  std::vector<int> indegree(d_, 0);
  for (int i = 0; i < d_; ++i) {
    for (int j = 0; j < d_; ++j) indegree[j] += has_edge(i, j) ? 1 : 0;
  }
  std::vector<int> order;
  order.reserve(d_);
  std::vector<bool> done(d_, false);
  while (static_cast<int>(order.size()) < d_) {
    int next = -1;
    for (int j = 0; j < d_; ++j) {
      if (!done[j] && indegree[j] == 0) {
        next = j;
        break;
      }
    }
    if (next < 0) return std::nullopt;
    done[next] = true;
    order.push_back(next);
    for (int j = 0; j < d_; ++j) {
      if (has_edge(next, j)) --indegree[j];
    }
  }
  return order;
}

DagAdjacency sample_er_dag(int d, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "edge probability must lie in [0,1], got " + std::to_string(p));
  }
  DagAdjacency dag(d);
  Engine engine(derive_seed(seed, Stream::Dag));
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates with our own uniform so the permutation does not depend on
  // the standard library's shuffle.
  for (int i = d - 1; i > 0; --i) {
    const auto j = static_cast<int>(engine() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      if (uniform(engine, 0.0, 1.0) < p) dag.set_edge(order[a], order[b]);
    }
  }
  return dag;
}

}  // namespace varsparse
