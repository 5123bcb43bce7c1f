#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace varsparse {

/// Directed acyclic graph over nodes 0..d-1; edge (i, j) means i -> j.
class DagAdjacency {
 public:
  /// Graph on d nodes without edges.
  explicit DagAdjacency(int d);

  /// Throws InvalidArgument on self-loops, out-of-range nodes or cycles.
  static DagAdjacency from_edges(int d, const std::vector<std::pair<int, int>>& edges);

  int size() const noexcept { return d_; }
  bool has_edge(int from, int to) const;
  std::size_t edge_count() const noexcept;

  /// Ascending list of i with i -> j.
  std::vector<int> parents(int j) const;
  std::vector<std::pair<int, int>> edges() const;

  /// Kahn's algorithm with smallest-index tie breaking; empty when cyclic.
  std::optional<std::vector<int>> topological_order() const;

 private:
  friend DagAdjacency sample_er_dag(int d, double p, std::uint64_t seed);

  void set_edge(int from, int to);

  int d_;
  std::vector<std::uint8_t> adj_;
};

/// Erdos-Renyi DAG: a uniform random permutation fixes the causal order and
/// every forward pair is connected independently with probability p.
DagAdjacency sample_er_dag(int d, double p, std::uint64_t seed);

}  // namespace varsparse
