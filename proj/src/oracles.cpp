#include "featforge/oracles.hpp"

#include "featforge/centrality.hpp"
#include "featforge/sgc.hpp"
#include "featforge/spectral_embed.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>

namespace featforge::oracle {

Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (coin(rng)) edges.emplace_back(i, j);
  return Graph::from_edges(n, edges);
}

std::vector<std::set<NodeId>> adjacency_sets(const Graph& g) {
  std::vector<std::set<NodeId>> adj(g.node_count());
  for (auto [u, v] : g.edge_list()) {
    adj[u].insert(v);
    adj[v].insert(u);
  }
  return adj;
}

Eigen::MatrixXd dense_adjacency(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (auto [u, v] : g.edge_list()) a(u, v) = a(v, u) = 1.0;
  return a;
}

std::vector<std::size_t> degrees(const Graph& g) {
  auto adj = adjacency_sets(g);
  std::vector<std::size_t> out;
  for (const auto& s : adj) out.push_back(s.size());
  return out;
}

std::vector<std::size_t> triangles(const Graph& g) {
  auto adj = adjacency_sets(g);
  const std::size_t n = g.node_count();
  std::vector<std::size_t> out(n, 0);
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      for (NodeId k = j + 1; k < n; ++k)
        if (adj[i].count(j) && adj[j].count(k) && adj[i].count(k)) {
          ++out[i];
          ++out[j];
          ++out[k];
        }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> egonet_counts(const Graph& g) {
  auto adj = adjacency_sets(g);
  auto edges = g.edge_list();
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    std::set<NodeId> ego = adj[v];
    ego.insert(v);
    std::size_t inside = 0, boundary = 0;
    for (auto [a, b] : edges) {
      bool ia = ego.count(a) > 0, ib = ego.count(b) > 0;
      if (ia && ib) ++inside;
      else if (ia != ib) ++boundary;
    }
    out.emplace_back(inside, boundary);
  }
  return out;
}

std::vector<std::size_t> core_numbers(const Graph& g) {
  auto adj = adjacency_sets(g);
  const std::size_t n = g.node_count();
  std::vector<std::size_t> core(n, 0);
  for (std::size_t k = 1; k <= n; ++k) {
    std::vector<bool> alive(n, true);
    bool changed = true;
    while (changed) {
      changed = false;
      for (NodeId v = 0; v < n; ++v) {
        if (!alive[v]) continue;
        std::size_t d = 0;
        for (NodeId u : adj[v]) d += alive[u] ? 1 : 0;
        if (d < k) {
          alive[v] = false;
          changed = true;
        }
      }
    }
    bool any = false;
    for (NodeId v = 0; v < n; ++v)
      if (alive[v]) {
        core[v] = k;
        any = true;
      }
    if (!any) break;
  }
  return core;
}

bool is_proper_coloring(const Graph& g, const std::vector<std::size_t>& colors) {
  if (colors.size() != g.node_count()) return false;
  for (auto [u, v] : g.edge_list())
    if (colors[u] == colors[v]) return false;
  return true;
}

std::vector<std::size_t> max_clique_per_node(const Graph& g) {
  const std::size_t n = g.node_count();
  auto adj = adjacency_sets(g);
  std::vector<std::size_t> best(n, n ? 1 : 0);
  if (n <= 20) {
    // Every subset, bit-mask indexed: mask is a clique iff mask minus its
    // lowest node is a clique and that node is adjacent to the rest.
    std::vector<std::uint32_t> nbr(n, 0);
    for (NodeId v = 0; v < n; ++v)
      for (NodeId u : adj[v]) nbr[v] |= 1u << u;
    std::vector<char> clique(std::size_t{1} << n, 0);
    clique[0] = 1;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      std::uint32_t low = mask & (~mask + 1);
      auto v = static_cast<NodeId>(std::countr_zero(low));
      std::uint32_t rest = mask ^ low;
      clique[mask] = clique[rest] && (nbr[v] & rest) == rest;
      if (!clique[mask]) continue;
      auto size = static_cast<std::size_t>(std::popcount(mask));
      for (std::uint32_t m = mask; m; m &= m - 1) {
        auto u = static_cast<std::size_t>(std::countr_zero(m));
        best[u] = std::max(best[u], size);
      }
    }
    return best;
  }
  // Larger graphs: list every clique by extending with higher-id common
  // neighbors (exhaustive, no pruning).
  std::vector<NodeId> current;
  std::function<void(const std::vector<NodeId>&)> extend = [&](const std::vector<NodeId>& cand) {
    for (NodeId v : current) best[v] = std::max(best[v], current.size());
    for (NodeId u : cand) {
      std::vector<NodeId> next;
      for (NodeId w : cand)
        if (w > u && adj[u].count(w)) next.push_back(w);
      current.push_back(u);
      extend(next);
      current.pop_back();
    }
  };
  std::vector<NodeId> all(n);
  for (NodeId v = 0; v < n; ++v) all[v] = v;
  extend(all);
  return best;
}

std::vector<double> pagerank(const Graph& g, double damping, double tol, std::size_t max_iter) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd a = dense_adjacency(g);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index u = 0; u < n; ++u) {
    double deg = a.col(u).sum();
    for (Eigen::Index v = 0; v < n; ++v) m(v, u) = deg > 0 ? a(v, u) / deg : 1.0 / static_cast<double>(n);
  }
  Eigen::MatrixXd google = damping * m + Eigen::MatrixXd::Constant(n, n, (1.0 - damping) / static_cast<double>(n));
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (std::size_t it = 0; it < max_iter; ++it) {
    Eigen::VectorXd next = google * x;
    double delta = (next - x).lpNorm<1>();
    x = next;
    if (delta < tol) break;
  }
  return {x.data(), x.data() + x.size()};
}

Eigen::MatrixXd katz_matrix(const Graph& g, double beta) {
  Eigen::MatrixXd a = dense_adjacency(g);
  const auto n = a.rows();
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - beta * a;
  return lhs.partialPivLu().solve(beta * a);
}

double spectral_radius(const Graph& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_adjacency(g), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd sgc_propagate(const Graph& g, const Eigen::MatrixXd& x, std::size_t hops) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd a_hat = dense_adjacency(g) + Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd d = a_hat.rowwise().sum().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd s = d.asDiagonal() * a_hat * d.asDiagonal();
  Eigen::MatrixXd out = x;
  for (std::size_t k = 0; k < hops; ++k) out = s * out;
  return out;
}

namespace {

std::vector<std::size_t> column_as_counts(const FeatureMatrix& x, std::size_t col) {
  std::vector<std::size_t> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = static_cast<std::size_t>(std::llround(x(i, col)));
  return out;
}

}  // namespace

bool run_centrality_suite(std::size_t graphs, std::uint64_t seed, std::ostream& log) {
  const double probs[] = {0.1, 0.3, 0.5};
  std::mt19937_64 rng(seed);
  std::size_t failures = 0;
  auto fail = [&](std::size_t idx, const std::string& what) {
    ++failures;
    log << "  graph " << idx << ": " << what << '\n';
  };
  CentralityConfig cfg;
  for (std::size_t t = 0; t < graphs; ++t) {
    std::size_t n = 1 + rng() % 30;
    Graph g = erdos_renyi(n, probs[t % 3], rng());

    if (column_as_counts(degree_features(g), 0) != oracle::degrees(g)) fail(t, "degree mismatch");
    auto tri = oracle::triangles(g);
    if (column_as_counts(triangle_features(g), 0) != tri) fail(t, "triangle mismatch");
    auto ego = egonet_features(g);
    auto ego_ref = egonet_counts(g);
    for (std::size_t v = 0; v < n; ++v)
      if (ego(v, 0) != static_cast<double>(ego_ref[v].first) || ego(v, 1) != static_cast<double>(ego_ref[v].second)) {
        fail(t, "egonet mismatch at node " + std::to_string(v));
        break;
      }
    auto core = oracle::core_numbers(g);
    if (featforge::core_numbers(g) != core) fail(t, "k-core mismatch");
    auto colors = greedy_coloring(g);
    std::size_t degeneracy = core.empty() ? 0 : *std::max_element(core.begin(), core.end());
    if (!is_proper_coloring(g, colors)) fail(t, "coloring is not proper");
    if (!colors.empty() && *std::max_element(colors.begin(), colors.end()) > degeneracy)
      fail(t, "coloring uses more than degeneracy + 1 colors");
    auto clique = clique_features(g, cfg);
    auto clique_ref = max_clique_per_node(g);
    if (clique.approximate || column_as_counts(clique.features, 0) != clique_ref) fail(t, "clique mismatch");
    for (std::size_t v = 0; v < n; ++v) {
      if (core[v] > g.degree(static_cast<NodeId>(v))) fail(t, "core exceeds degree");
      if (clique_ref[v] > core[v] + 1) fail(t, "clique exceeds core + 1");
      if (tri[v] > 0 && clique_ref[v] < 3) fail(t, "triangle node with clique < 3");
    }
    auto pr = pagerank_features(g, cfg);
    auto pr_ref = oracle::pagerank(g, cfg.pagerank_damping, cfg.pagerank_tol, cfg.pagerank_max_iter);
    double sum = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      sum += pr.features(v, 0);
      if (std::abs(pr.features(v, 0) - pr_ref[v]) > 1e-8) {
        fail(t, "pagerank differs from dense oracle at node " + std::to_string(v));
        break;
      }
      if (pr.features(v, 0) < 0.0) fail(t, "negative pagerank");
    }
    if (std::abs(sum - 1.0) > 1e-6) fail(t, "pagerank does not sum to 1");
  }
  log << "centrality: " << graphs << " graphs, " << failures << " failures\n";
  return failures == 0;
}

bool run_spectral_suite(std::size_t graphs, std::uint64_t seed, std::ostream& log) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::size_t failures = 0;
  double worst_apply = 0.0, worst_recon = 0.0;
  for (std::size_t t = 0; t < graphs; ++t) {
    std::size_t n = 2 + rng() % 49;
    double p = 0.05 + 0.4 * static_cast<double>(rng() % 1000) / 1000.0;
    Graph g = erdos_renyi(n, p, rng());
    if (g.edge_count() == 0) g = Graph::from_edges(n, std::vector<std::pair<NodeId, NodeId>>{{0, 1}});

    double beta = 0.5 / spectral_radius(g);
    Eigen::MatrixXd s = katz_matrix(g, beta);
    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    for (auto& v : x) v = unit(rng);
    Eigen::VectorXd expect = s * x;
    Eigen::VectorXd got = katz_apply(g, beta, x, 1e-12);
    double rel = (got - expect).norm() / std::max(expect.norm(), 1e-300);
    worst_apply = std::max(worst_apply, rel);
    if (rel > 1e-6) {
      ++failures;
      log << "  graph " << t << ": katz apply relative error " << rel << '\n';
    }

    HopeConfig cfg;
    cfg.dim = n;
    cfg.seed = rng();
    auto f = hope_factorize(g, cfg);
    Eigen::MatrixXd s_hat = katz_matrix(g, f.beta);
    Eigen::MatrixXd recon = f.svd.u * f.svd.sigma.asDiagonal() * f.svd.v.transpose();
    double rrel = (recon - s_hat).norm() / std::max(s_hat.norm(), 1e-300);
    worst_recon = std::max(worst_recon, rrel);
    if (rrel > 1e-6) {
      ++failures;
      log << "  graph " << t << ": full-rank reconstruction relative error " << rrel << '\n';
    }
  }
  log << "spectral: " << graphs << " graphs, " << failures << " failures (worst apply " << worst_apply
      << ", worst reconstruction " << worst_recon << ")\n";
  return failures == 0;
}

bool run_propagation_suite(std::size_t graphs, std::uint64_t seed, std::ostream& log) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::size_t failures = 0;
  double worst = 0.0;
  for (std::size_t t = 0; t < graphs; ++t) {
    std::size_t n = 1 + rng() % 20;
    Graph g = erdos_renyi(n, 0.1 + 0.1 * static_cast<double>(t % 5), rng());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = unit(rng);
    for (std::size_t k = 0; k <= 3; ++k) {
      Eigen::MatrixXd expect = sgc_propagate(g, x, k);
      FeatureMatrix got = propagate(g, FeatureMatrix(FeatureMatrix::Matrix(x)), k);
      double err = (got.values() - expect).cwiseAbs().maxCoeff();
      worst = std::max(worst, err);
      if (err > 1e-10) {
        ++failures;
        log << "  graph " << t << ", K=" << k << ": max abs error " << err << '\n';
      }
    }
  }
  log << "propagation: " << graphs << " graphs x K in {0..3}, " << failures << " failures (worst " << worst << ")\n";
  return failures == 0;
}

}  // namespace featforge::oracle
