#pragma once

// Brute-force reference computations. They share nothing with the library
// algorithms beyond the Graph type, and back both the unit tests and the
// `validate` subcommand.

#include "featforge/graph.hpp"

#include <cstdint>
#include <iosfwd>
#include <set>
#include <vector>

namespace featforge::oracle {

/// G(n, p) with a seeded generator.
Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed);

/// Adjacency sets rebuilt from the edge list.
std::vector<std::set<NodeId>> adjacency_sets(const Graph& g);
Eigen::MatrixXd dense_adjacency(const Graph& g);

std::vector<std::size_t> degrees(const Graph& g);
/// Triple loop over i < j < k.
std::vector<std::size_t> triangles(const Graph& g);
/// Scans every edge against the explicit egonet set of each node.
std::vector<std::pair<std::size_t, std::size_t>> egonet_counts(const Graph& g);
/// For each k, delete nodes of degree < k until a fixpoint.
std::vector<std::size_t> core_numbers(const Graph& g);
bool is_proper_coloring(const Graph& g, const std::vector<std::size_t>& colors);
/// Enumerates all 2^n node subsets (n <= 24).
std::vector<std::size_t> max_clique_per_node(const Graph& g);

/// Dense transition matrix power iteration (same stopping rule as the
/// library: L1 change below tol).
std::vector<double> pagerank(const Graph& g, double damping, double tol, std::size_t max_iter);

/// Dense (I - beta A)^-1 beta A.
Eigen::MatrixXd katz_matrix(const Graph& g, double beta);
/// Largest |eigenvalue| of A from a dense symmetric eigensolver.
double spectral_radius(const Graph& g);
/// Dense normalized adjacency power S^K X.
Eigen::MatrixXd sgc_propagate(const Graph& g, const Eigen::MatrixXd& x, std::size_t hops);

/// Runs implementation-vs-oracle checks on `graphs` seeded random graphs
/// (n <= 30, p in {0.1, 0.3, 0.5}); writes one line per failure and a summary
/// to `log`. Returns true when everything matched.
bool run_centrality_suite(std::size_t graphs, std::uint64_t seed, std::ostream& log);

/// Katz apply and full-rank factorization vs dense inverse on random graphs
/// (n <= 50).
bool run_spectral_suite(std::size_t graphs, std::uint64_t seed, std::ostream& log);

/// SGC propagation vs the dense S^K X for K in {0..3} on graphs <= 20 nodes.
bool run_propagation_suite(std::size_t graphs, std::uint64_t seed, std::ostream& log);

}  // namespace featforge::oracle
