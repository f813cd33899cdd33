#include "featforge/graph.hpp"

#include <algorithm>
#include <cmath>

namespace featforge {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : Error(line ? source + ":" + std::to_string(line) + ": " + what : source + ": " + what),
      line_(line) {}

Graph Graph::from_edges(std::size_t node_count,
                        std::span<const std::pair<NodeId, NodeId>> edges) {
  std::vector<std::size_t> offsets(node_count + 1, 0);
  for (auto [u, v] : edges) {
    if (u >= node_count || v >= node_count)
      throw Error("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                  ") references a node outside [0, " + std::to_string(node_count) + ")");
    if (u == v) throw Error("self-loop on node " + std::to_string(u));
    ++offsets[u + 1];
    ++offsets[v + 1];
  }
  for (std::size_t i = 0; i < node_count; ++i) offsets[i + 1] += offsets[i];

  std::vector<NodeId> cols(offsets.back());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (auto [u, v] : edges) {
    cols[cursor[u]++] = v;
    cols[cursor[v]++] = u;
  }
  for (std::size_t i = 0; i < node_count; ++i) {
    auto first = cols.begin() + static_cast<std::ptrdiff_t>(offsets[i]);
    auto last = cols.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]);
    std::sort(first, last);
    if (auto dup = std::adjacent_find(first, last); dup != last)
      throw Error("duplicate edge (" + std::to_string(i) + ", " + std::to_string(*dup) + ")");
  }
  Graph g;
  g.row_offsets_ = std::move(offsets);
  g.col_indices_ = std::move(cols);
  return g;
}

Graph Graph::from_csr(std::vector<std::size_t> row_offsets, std::vector<NodeId> col_indices) {
  if (row_offsets.empty() || row_offsets.front() != 0 ||
      row_offsets.back() != col_indices.size())
    throw Error("row offsets do not bracket the column array");
  const std::size_t n = row_offsets.size() - 1;
  if (col_indices.size() % 2 != 0) throw Error("odd number of adjacency entries");
  Graph g;
  g.row_offsets_ = std::move(row_offsets);
  g.col_indices_ = std::move(col_indices);
  for (std::size_t i = 0; i < n; ++i) {
    if (g.row_offsets_[i] > g.row_offsets_[i + 1]) throw Error("row offsets decrease");
    auto nb = g.neighbors(static_cast<NodeId>(i));
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] >= n) throw Error("neighbor id out of range");
      if (nb[k] == i) throw Error("self-loop on node " + std::to_string(i));
      if (k > 0 && nb[k - 1] >= nb[k]) throw Error("neighbor list not strictly ascending");
      if (!g.has_edge(nb[k], static_cast<NodeId>(i))) throw Error("adjacency is not symmetric");
    }
  }
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const noexcept {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<std::pair<NodeId, NodeId>> Graph::edge_list() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(edge_count());
  for (NodeId u = 0; u < node_count(); ++u)
    for (NodeId v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

Graph Graph::permuted(std::span<const NodeId> perm) const {
  if (perm.size() != node_count()) throw Error("permutation size mismatch");
  auto edges = edge_list();
  for (auto& [u, v] : edges) {
    u = perm[u];
    v = perm[v];
  }
  return from_edges(node_count(), edges);
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t dim)
    : values_(Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim))) {}

FeatureMatrix::FeatureMatrix(Matrix values) : values_(std::move(values)) { check_finite(); }

void FeatureMatrix::check_finite() const {
  if (!values_.allFinite()) throw Error("feature matrix contains non-finite entries");
}

LabelSet::LabelSet(LabelMode mode, std::size_t num_classes,
                   std::vector<std::vector<ClassId>> assignments)
    : mode_(mode), num_classes_(num_classes), assignments_(std::move(assignments)) {
  if (num_classes_ == 0) throw Error("label set needs at least one class");
  for (std::size_t i = 0; i < assignments_.size(); ++i) {
    auto& a = assignments_[i];
    if (a.empty()) throw Error("node " + std::to_string(i) + " has an empty label set");
    if (mode_ == LabelMode::single && a.size() != 1)
      throw Error("node " + std::to_string(i) + " has several labels in single-label mode");
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    if (a.front() < 0 || static_cast<std::size_t>(a.back()) >= num_classes_)
      throw Error("node " + std::to_string(i) + " has a class id outside [0, " +
                  std::to_string(num_classes_) + ")");
  }
}

LabelSet LabelSet::single(std::size_t num_classes, std::span<const ClassId> labels) {
  std::vector<std::vector<ClassId>> a;
  a.reserve(labels.size());
  for (ClassId c : labels) a.push_back({c});
  return LabelSet(LabelMode::single, num_classes, std::move(a));
}

LabelSet LabelSet::subset(std::span<const std::size_t> nodes) const {
  LabelSet out;
  out.mode_ = mode_;
  out.num_classes_ = num_classes_;
  out.assignments_.reserve(nodes.size());
  for (std::size_t i : nodes) out.assignments_.push_back(assignments_.at(i));
  return out;
}

std::vector<std::size_t> LabelSet::label_counts() const {
  std::vector<std::size_t> out(assignments_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = assignments_[i].size();
  return out;
}

void GraphCollection::validate() const {
  if (graph_labels.size() != graphs.size())
    throw Error("graph label count does not match graph count");
  for (ClassId c : graph_labels)
    if (c < 0 || static_cast<std::size_t>(c) >= num_classes)
      throw Error("graph label outside [0, num_classes)");
  if (node_features) {
    if (node_features->size() != graphs.size())
      throw Error("node feature list does not match graph count");
    for (std::size_t i = 0; i < graphs.size(); ++i)
      if ((*node_features)[i].rows() != graphs[i].node_count())
        throw Error("graph " + std::to_string(i) + ": feature rows do not match node count");
  }
}

}  // namespace featforge
