#pragma once

#include "featforge/graph.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

namespace fs = std::filesystem;
using featforge::Graph;
using featforge::NodeId;

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = fs::temp_directory_path() / ("featforge-test-" + std::to_string(rng()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

  fs::path write(const std::string& name, const std::string& content) const {
    fs::path p = path_ / name;
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  fs::path path_;
};

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Graph make_graph(std::size_t n, std::vector<std::pair<NodeId, NodeId>> edges) {
  return Graph::from_edges(n, edges);
}

inline Graph path_graph(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make_graph(n, e);
}

inline Graph complete_graph(std::size_t n, NodeId offset = 0, std::size_t total = 0) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) e.emplace_back(offset + i, offset + j);
  return make_graph(total ? total : n, e);
}

inline Graph cycle_graph(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i < n; ++i) e.emplace_back(i, static_cast<NodeId>((i + 1) % n));
  return make_graph(n, e);
}

/// Center 0 joined to leaves 1..leaves.
inline Graph star_graph(std::size_t leaves) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return make_graph(leaves + 1, e);
}

/// Two disjoint K5s on nodes 0..4 and 5..9.
inline Graph two_k5() {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId base : {0u, 5u})
    for (NodeId i = 0; i < 5; ++i)
      for (NodeId j = i + 1; j < 5; ++j) e.emplace_back(base + i, base + j);
  return make_graph(10, e);
}

inline std::vector<NodeId> random_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<NodeId> p(n);
  for (NodeId i = 0; i < n; ++i) p[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

struct NodeFiles {
  fs::path edges, labels, features;
};

/// Two planted communities (labels = community) with one informative feature
/// column, written in the on-disk formats.
inline NodeFiles write_planted_dataset(const TempDir& dir, std::size_t n = 120, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution in(0.15), out(0.02);
  std::normal_distribution<double> noise;
  std::string edges, labels, features;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (i % 2 == j % 2 ? in(rng) : out(rng)) edges += std::to_string(i) + ' ' + std::to_string(j) + '\n';
  // A ring inside each community keeps every node in the edge list.
  for (std::size_t i = 0; i < n; ++i) edges += std::to_string(i) + ' ' + std::to_string((i + 2) % n) + '\n';
  for (std::size_t i = 0; i < n; ++i) {
    labels += std::to_string(i) + ' ' + std::to_string(i % 2) + '\n';
    features += std::to_string(static_cast<double>(i % 2) + noise(rng)) + ',' + std::to_string(noise(rng)) + '\n';
  }
  return {dir.write("planted.edges", edges), dir.write("planted.labels", labels),
          dir.write("planted.features.csv", features)};
}

/// TU-format directory of 20 triangles (class 0) and 20 four-node paths (class 1).
inline fs::path write_triangles_paths(const TempDir& dir, const std::string& name = "TRIPATH") {
  std::string a, ind, gl;
  std::size_t next = 1;
  auto edge = [&](std::size_t u, std::size_t v) {
    a += std::to_string(u) + ", " + std::to_string(v) + '\n';
    a += std::to_string(v) + ", " + std::to_string(u) + '\n';
  };
  for (std::size_t g = 1; g <= 40; ++g) {
    const bool tri = g <= 20;
    const std::size_t k = tri ? 3 : 4;
    if (tri) {
      edge(next, next + 1);
      edge(next + 1, next + 2);
      edge(next, next + 2);
    } else {
      edge(next, next + 1);
      edge(next + 1, next + 2);
      edge(next + 2, next + 3);
    }
    for (std::size_t i = 0; i < k; ++i) ind += std::to_string(g) + '\n';
    gl += tri ? "0\n" : "1\n";
    next += k;
  }
  dir.write(name + "/" + name + "_A.txt", a);
  dir.write(name + "/" + name + "_graph_indicator.txt", ind);
  dir.write(name + "/" + name + "_graph_labels.txt", gl);
  return dir / name;
}

}  // namespace testing_support
