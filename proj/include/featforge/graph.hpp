#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace featforge {

using NodeId = std::uint32_t;
using ClassId = std::int32_t;

/// Base error for everything the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the offending 1-based line number (0 if n/a).
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Immutable undirected, unweighted graph in compressed adjacency form.
///
/// Neighbor lists are sorted, duplicate free and contain no self-loops; the
/// adjacency is symmetric. Each undirected edge is stored twice in
/// col_indices and counted once in edge_count().
class Graph {
 public:
  Graph() : row_offsets_(1, 0) {}

  /// Builds a graph from an undirected edge list. Both orientations of an
  /// edge are accepted and merged. Throws on self-loops, duplicate edges or
  /// ids >= node_count; callers that want coercion clean the list first.
  static Graph from_edges(std::size_t node_count,
                          std::span<const std::pair<NodeId, NodeId>> edges);

  /// Adopts already-built CSR arrays after validating every invariant.
  static Graph from_csr(std::vector<std::size_t> row_offsets,
                        std::vector<NodeId> col_indices);

  std::size_t node_count() const noexcept { return row_offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return col_indices_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId v) const noexcept {
    return {col_indices_.data() + row_offsets_[v],
            col_indices_.data() + row_offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const noexcept {
    return row_offsets_[v + 1] - row_offsets_[v];
  }
  bool has_edge(NodeId u, NodeId v) const noexcept;

  std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
  std::span<const NodeId> col_indices() const noexcept { return col_indices_; }

  /// Each undirected edge once, as (u, v) with u < v, in row order.
  std::vector<std::pair<NodeId, NodeId>> edge_list() const;

  /// Relabels node v as perm[v].
  Graph permuted(std::span<const NodeId> perm) const;

  bool operator==(const Graph&) const = default;

 private:
  std::vector<std::size_t> row_offsets_;
  std::vector<NodeId> col_indices_;
};

/// Dense real matrix with one row of features per node. Entries are finite.
class FeatureMatrix {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t dim);
  explicit FeatureMatrix(Matrix values);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(values_.cols()); }

  double operator()(std::size_t r, std::size_t c) const { return values_(r, c); }
  double& operator()(std::size_t r, std::size_t c) { return values_(r, c); }

  const Matrix& values() const noexcept { return values_; }
  Matrix& values() noexcept { return values_; }

  /// Throws Error if any entry is NaN or infinite.
  void check_finite() const;

  bool operator==(const FeatureMatrix& other) const {
    return values_.rows() == other.values_.rows() && values_.cols() == other.values_.cols() &&
           values_ == other.values_;
  }

 private:
  Matrix values_;
};

enum class LabelMode { single, multi };

/// Per-node class assignments. Single mode holds exactly one class per node;
/// multi mode holds a non-empty sorted set per node.
class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(LabelMode mode, std::size_t num_classes,
           std::vector<std::vector<ClassId>> assignments);

  static LabelSet single(std::size_t num_classes, std::span<const ClassId> labels);

  LabelMode mode() const noexcept { return mode_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t size() const noexcept { return assignments_.size(); }

  std::span<const ClassId> classes(std::size_t node) const noexcept {
    return assignments_[node];
  }
  /// Single-mode shorthand.
  ClassId label(std::size_t node) const noexcept { return assignments_[node].front(); }

  /// Restricts to the given nodes, in the given order.
  LabelSet subset(std::span<const std::size_t> nodes) const;

  /// Number of labels per node (the k_i used for top-k multi-label prediction).
  std::vector<std::size_t> label_counts() const;

  bool operator==(const LabelSet&) const = default;

 private:
  LabelMode mode_ = LabelMode::single;
  std::size_t num_classes_ = 0;
  std::vector<std::vector<ClassId>> assignments_;
};

/// Small graphs with one label per graph, for graph classification.
struct GraphCollection {
  std::vector<Graph> graphs;
  std::vector<ClassId> graph_labels;
  std::size_t num_classes = 0;
  /// Per-graph node features (one-hot node labels), when the source has them.
  std::optional<std::vector<FeatureMatrix>> node_features;

  std::size_t size() const noexcept { return graphs.size(); }
  /// Throws Error when the collection's invariants do not hold.
  void validate() const;
};

}  // namespace featforge
