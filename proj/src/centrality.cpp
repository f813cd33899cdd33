#include "featforge/centrality.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace featforge {
namespace {

FeatureMatrix column(const std::vector<std::size_t>& values) {
  FeatureMatrix out(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) out(i, 0) = static_cast<double>(values[i]);
  return out;
}

/// Min-degree peeling with bucket queues (Batagelj-Zaversnik). Fills the core
/// number of every node and the order in which nodes were removed.
void peel(const Graph& g, std::vector<std::size_t>& core, std::vector<NodeId>& order) {
  const std::size_t n = g.node_count();
  core.assign(n, 0);
  order.assign(n, 0);
  if (n == 0) return;
  std::size_t max_deg = 0;
  for (NodeId v = 0; v < n; ++v) {
    core[v] = g.degree(v);
    max_deg = std::max(max_deg, core[v]);
  }
  std::vector<std::size_t> bin(max_deg + 1, 0);
  for (std::size_t d : core) ++bin[d];
  std::size_t start = 0;
  for (auto& b : bin) {
    std::size_t count = b;
    b = start;
    start += count;
  }
  std::vector<std::size_t> pos(n);
  for (NodeId v = 0; v < n; ++v) {
    pos[v] = bin[core[v]]++;
    order[pos[v]] = v;
  }
  for (std::size_t d = max_deg; d > 0; --d) bin[d] = bin[d - 1];
  bin[0] = 0;

  for (std::size_t i = 0; i < n; ++i) {
    NodeId v = order[i];
    for (NodeId u : g.neighbors(v)) {
      if (core[u] > core[v]) {
        std::size_t du = core[u];
        std::size_t pu = pos[u];
        std::size_t pw = bin[du];
        NodeId w = order[pw];
        if (u != w) {
          std::swap(order[pu], order[pw]);
          pos[u] = pw;
          pos[w] = pu;
        }
        ++bin[du];
        --core[u];
      }
    }
  }
}

/// Dense bitset adjacency over a small vertex subset, for clique search.
class BitGraph {
 public:
  BitGraph(const Graph& g, const std::vector<NodeId>& vertices)
      : n_(vertices.size()), words_((vertices.size() + 63) / 64), adj_(n_ * words_, 0) {
    for (std::size_t i = 0; i < n_; ++i) {
      auto nb = g.neighbors(vertices[i]);
      // vertices is sorted: merge-walk the two sorted lists.
      std::size_t j = 0;
      for (NodeId u : nb) {
        while (j < n_ && vertices[j] < u) ++j;
        if (j == n_) break;
        if (vertices[j] == u) set(mutable_row(i), j);
      }
    }
  }

  std::size_t size() const { return n_; }
  std::size_t words() const { return words_; }
  const std::uint64_t* row(std::size_t i) const { return adj_.data() + i * words_; }
  std::uint64_t* mutable_row(std::size_t i) { return adj_.data() + i * words_; }

  static void set(std::uint64_t* bits, std::size_t j) { bits[j / 64] |= std::uint64_t{1} << (j % 64); }
  static void reset(std::uint64_t* bits, std::size_t j) { bits[j / 64] &= ~(std::uint64_t{1} << (j % 64)); }

 private:
  std::size_t n_;
  std::size_t words_;
  std::vector<std::uint64_t> adj_;
};

/// Branch and bound maximum clique (Tomita-style greedy coloring bound).
class CliqueSearch {
 public:
  explicit CliqueSearch(const BitGraph& bg) : bg_(bg) {}

  /// Largest clique within `candidates`, plus `base` already-chosen vertices
  /// adjacent to all of them. Stops once `stop_at` is reached.
  std::size_t run(std::vector<std::uint64_t> candidates, std::size_t base, std::size_t lower,
                  std::size_t stop_at) {
    best_ = lower;
    stop_at_ = stop_at;
    expand(candidates, base);
    return best_;
  }

 private:
  void expand(std::vector<std::uint64_t>& cand, std::size_t depth) {
    if (best_ >= stop_at_) return;
    std::vector<std::size_t> order;
    std::vector<std::size_t> bound;
    color_sort(cand, order, bound);
    const std::size_t words = bg_.words();
    for (std::size_t k = order.size(); k-- > 0;) {
      if (depth + bound[k] <= best_) return;
      std::size_t v = order[k];
      std::vector<std::uint64_t> next(words);
      bool empty = true;
      const std::uint64_t* nb = bg_.row(v);
      for (std::size_t w = 0; w < words; ++w) {
        next[w] = cand[w] & nb[w];
        empty = empty && next[w] == 0;
      }
      if (empty) {
        best_ = std::max(best_, depth + 1);
      } else {
        expand(next, depth + 1);
      }
      if (best_ >= stop_at_) return;
      BitGraph::reset(cand.data(), v);
    }
  }

  /// Greedy sequential coloring of the candidate set. order[k] has color
  /// bound[k] (1-based), non-decreasing in k.
  void color_sort(const std::vector<std::uint64_t>& cand, std::vector<std::size_t>& order,
                  std::vector<std::size_t>& bound) const {
    const std::size_t words = bg_.words();
    std::vector<std::uint64_t> uncolored = cand;
    std::size_t color = 0;
    auto any = [&](const std::vector<std::uint64_t>& bits) {
      return std::any_of(bits.begin(), bits.end(), [](std::uint64_t w) { return w != 0; });
    };
    while (any(uncolored)) {
      ++color;
      std::vector<std::uint64_t> avail = uncolored;
      for (std::size_t w = 0; w < words; ++w) {
        while (avail[w]) {
          std::size_t bit = static_cast<std::size_t>(std::countr_zero(avail[w]));
          std::size_t v = w * 64 + bit;
          order.push_back(v);
          bound.push_back(color);
          BitGraph::reset(uncolored.data(), v);
          BitGraph::reset(avail.data(), v);
          const std::uint64_t* nb = bg_.row(v);
          for (std::size_t x = w; x < words; ++x) avail[x] &= ~nb[x];
        }
      }
    }
  }

  const BitGraph& bg_;
  std::size_t best_ = 0;
  std::size_t stop_at_ = 0;
};

std::size_t greedy_clique_through(const Graph& g, NodeId v) {
  auto nb = g.neighbors(v);
  std::vector<NodeId> cand(nb.begin(), nb.end());
  std::stable_sort(cand.begin(), cand.end(),
                   [&](NodeId a, NodeId b) { return g.degree(a) > g.degree(b); });
  std::vector<NodeId> clique{v};
  for (NodeId u : cand) {
    bool ok = std::all_of(clique.begin() + 1, clique.end(), [&](NodeId w) { return g.has_edge(u, w); });
    if (ok) clique.push_back(u);
  }
  return clique.size();
}

}  // namespace

void CentralityConfig::validate() const {
  if (!(pagerank_damping > 0.0 && pagerank_damping < 1.0))
    throw Error("pagerank damping must lie strictly inside (0, 1)");
  if (!(pagerank_tol > 0.0)) throw Error("pagerank tolerance must be positive");
  if (pagerank_max_iter == 0) throw Error("pagerank max_iter must be positive");
  if (clique_node_cap == 0) throw Error("clique node cap must be positive");
}

FeatureMatrix degree_features(const Graph& g) {
  std::vector<std::size_t> deg(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) deg[v] = g.degree(v);
  return column(deg);
}

PageRankResult pagerank_features(const Graph& g, const CentralityConfig& cfg) {
  cfg.validate();
  const std::size_t n = g.node_count();
  PageRankResult result;
  result.features = FeatureMatrix(n, 1);
  if (n == 0) return result;

  const double d = cfg.pagerank_damping;
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> rank(n, inv_n), next(n), share(n);
  result.converged = false;
  for (std::size_t it = 1; it <= cfg.pagerank_max_iter; ++it) {
    double dangling = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      if (g.degree(v) == 0) {
        dangling += rank[v];
        share[v] = 0.0;
      } else {
        share[v] = rank[v] / static_cast<double>(g.degree(v));
      }
    }
    const double base = (1.0 - d) * inv_n + d * dangling * inv_n;
    double delta = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      double acc = 0.0;
      for (NodeId u : g.neighbors(v)) acc += share[u];
      next[v] = base + d * acc;
      delta += std::abs(next[v] - rank[v]);
    }
    rank.swap(next);
    result.iterations = it;
    if (delta < cfg.pagerank_tol) {
      result.converged = true;
      break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) result.features(i, 0) = rank[i];
  return result;
}

namespace {

std::vector<std::size_t> triangle_counts(const Graph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::size_t> tri(n, 0);
  for (NodeId u = 0; u < n; ++u) {
    auto nu = g.neighbors(u);
    for (NodeId w : nu) {
      if (w <= u) continue;
      auto nw = g.neighbors(w);
      // Each triangle is reached once from each of its three edges; credit
      // the vertex opposite the edge.
      auto a = nu.begin(), b = nw.begin();
      while (a != nu.end() && b != nw.end()) {
        if (*a < *b) {
          ++a;
        } else if (*b < *a) {
          ++b;
        } else {
          ++tri[*a];
          ++a;
          ++b;
        }
      }
    }
  }
  return tri;
}

}  // namespace

FeatureMatrix triangle_features(const Graph& g) { return column(triangle_counts(g)); }

FeatureMatrix egonet_features(const Graph& g) {
  const std::size_t n = g.node_count();
  auto tri = triangle_counts(g);
  FeatureMatrix out(n, 2);
  for (NodeId v = 0; v < n; ++v) {
    std::size_t internal = g.degree(v) + tri[v];
    std::size_t degree_sum = g.degree(v);
    for (NodeId u : g.neighbors(v)) degree_sum += g.degree(u);
    out(v, 0) = static_cast<double>(internal);
    out(v, 1) = static_cast<double>(degree_sum - 2 * internal);
  }
  return out;
}

std::vector<std::size_t> core_numbers(const Graph& g) {
  std::vector<std::size_t> core;
  std::vector<NodeId> order;
  peel(g, core, order);
  return core;
}

FeatureMatrix kcore_features(const Graph& g) { return column(core_numbers(g)); }

std::vector<NodeId> degeneracy_order(const Graph& g) {
  std::vector<std::size_t> core;
  std::vector<NodeId> order;
  peel(g, core, order);
  return order;
}

std::vector<std::size_t> greedy_coloring(const Graph& g) {
  const std::size_t n = g.node_count();
  constexpr std::size_t uncolored = static_cast<std::size_t>(-1);
  std::vector<std::size_t> color(n, uncolored);
  auto order = degeneracy_order(g);
  std::vector<std::size_t> mark;  // mark[c] == v+1 when color c is taken around v
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeId v = *it;
    mark.resize(std::max(mark.size(), g.degree(v) + 1), 0);
    for (NodeId u : g.neighbors(v))
      if (color[u] != uncolored && color[u] < mark.size()) mark[color[u]] = v + 1;
    std::size_t c = 0;
    while (mark[c] == v + 1) ++c;
    color[v] = c;
  }
  return color;
}

FeatureMatrix coloring_features(const Graph& g) { return column(greedy_coloring(g)); }

std::size_t max_clique_within(const Graph& g, std::vector<NodeId> candidates) {
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.empty()) return 0;
  BitGraph bg(g, candidates);
  std::vector<std::uint64_t> all(bg.words(), 0);
  for (std::size_t i = 0; i < bg.size(); ++i) BitGraph::set(all.data(), i);
  return CliqueSearch(bg).run(std::move(all), 0, 1, bg.size());
}

CliqueResult clique_features(const Graph& g, const CentralityConfig& cfg) {
  cfg.validate();
  const std::size_t n = g.node_count();
  CliqueResult result;
  result.features = FeatureMatrix(n, 1);
  auto core = core_numbers(g);
  result.upper_bound.resize(n);
  for (std::size_t v = 0; v < n; ++v) result.upper_bound[v] = core[v] + 1;

  if (n > cfg.clique_node_cap) {
    result.approximate = true;
    for (NodeId v = 0; v < n; ++v) result.features(v, 0) = static_cast<double>(greedy_clique_through(g, v));
    return result;
  }

  std::vector<NodeId> all(n);
  std::iota(all.begin(), all.end(), NodeId{0});
  const BitGraph bg(g, all);
  CliqueSearch search(bg);
  for (NodeId v = 0; v < n; ++v) {
    std::vector<std::uint64_t> cand(bg.row(v), bg.row(v) + bg.words());
    std::size_t lower = greedy_clique_through(g, v);
    std::size_t best = lower;
    if (lower < result.upper_bound[v] && g.degree(v) > 0)
      best = search.run(std::move(cand), 1, lower, result.upper_bound[v]);
    result.features(v, 0) = static_cast<double>(best);
  }
  return result;
}

}  // namespace featforge
