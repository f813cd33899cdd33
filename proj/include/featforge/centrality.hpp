#pragma once

#include "featforge/graph.hpp"

#include <cstddef>
#include <vector>

namespace featforge {

struct CentralityConfig {
  double pagerank_damping = 0.85;
  double pagerank_tol = 1e-8;
  std::size_t pagerank_max_iter = 200;
  /// Graphs with more nodes than this get the heuristic clique bound.
  std::size_t clique_node_cap = 200;

  void validate() const;
};

/// Row i = |N(i)|.
FeatureMatrix degree_features(const Graph& g);

struct PageRankResult {
  FeatureMatrix features;
  std::size_t iterations = 0;
  /// False when max_iter was reached first; the vector is still returned.
  bool converged = true;
};

/// Power iteration with uniform teleport and uniform redistribution of
/// dangling mass. Stops when the L1 change drops below pagerank_tol.
PageRankResult pagerank_features(const Graph& g, const CentralityConfig& cfg = {});

/// Row i = number of triangles through i (sorted-adjacency intersection).
FeatureMatrix triangle_features(const Graph& g);

/// Two columns per node v, with ego(v) = {v} ∪ N(v):
///   0: edges with both endpoints in ego(v)
///   1: edges with exactly one endpoint in ego(v)
FeatureMatrix egonet_features(const Graph& g);

/// Core numbers via bucket peeling, O(n + m).
std::vector<std::size_t> core_numbers(const Graph& g);
FeatureMatrix kcore_features(const Graph& g);

/// Smallest-last (degeneracy) order: the vertex removal order of min-degree
/// peeling. Coloring proceeds in reverse of this order.
std::vector<NodeId> degeneracy_order(const Graph& g);

/// Greedy proper coloring in smallest-last order; row i = color index of i.
std::vector<std::size_t> greedy_coloring(const Graph& g);
FeatureMatrix coloring_features(const Graph& g);

struct CliqueResult {
  /// Exact max clique through each node, or a greedy lower bound when approximate.
  FeatureMatrix features;
  /// core(v) + 1, the bound paired with the heuristic; always filled.
  std::vector<std::size_t> upper_bound;
  bool approximate = false;
};

/// Largest clique containing each node. Exact branch and bound up to
/// clique_node_cap nodes, greedy lower bound above it.
CliqueResult clique_features(const Graph& g, const CentralityConfig& cfg = {});

/// Exact maximum clique size within the node subset `candidates` (sorted ids).
std::size_t max_clique_within(const Graph& g, std::vector<NodeId> candidates);

}  // namespace featforge
