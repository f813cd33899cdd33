#pragma once

#include "featforge/graph.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace featforge {

namespace fs = std::filesystem;

/// Original node tokens indexed by internal id (first-appearance order).
class NodeIdMap {
 public:
  NodeIdMap() = default;
  explicit NodeIdMap(std::vector<std::string> tokens);
  static NodeIdMap identity(std::size_t n);

  /// Returns the id of `token`, appending it if unseen.
  NodeId intern(std::string_view token);
  std::optional<NodeId> find(std::string_view token) const;
  const std::string& token(NodeId id) const { return tokens_.at(id); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  /// True when the tokens are exactly the decimal integers 0..size-1, in any order.
  bool is_dense_integer() const;

  bool operator==(const NodeIdMap& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, NodeId> index_;
};

struct EdgeListOptions {
  bool dedup = true;
  bool drop_self_loops = true;
  /// Tokens interned before the file is read, in order. Lets a caller pin the
  /// id assignment (round trips) or declare isolated nodes.
  std::vector<std::string> preset_ids;
};

struct LoadedGraph {
  Graph graph;
  NodeIdMap ids;
};

/// Reads `u v` lines (`#` comments, blank lines ignored). Tokens are mapped to
/// contiguous ids in first-appearance order. Without dedup / drop_self_loops a
/// duplicate edge or self-loop is an error rather than being coerced.
LoadedGraph read_edge_list(const fs::path& path, const EdgeListOptions& options = {});
inline Graph load_edge_list(const fs::path& path, const EdgeListOptions& options = {}) {
  return read_edge_list(path, options).graph;
}
void write_edge_list(const fs::path& path, const Graph& g);

void write_id_map(const fs::path& path, const NodeIdMap& ids);
NodeIdMap load_id_map(const fs::path& path);

/// Headerless numeric CSV, one row per node.
FeatureMatrix load_feature_matrix(const fs::path& path);
void write_feature_matrix(const fs::path& path, const FeatureMatrix& x);
std::string format_feature_csv(const FeatureMatrix& x);

/// Raw `node label` / `node l1,l2,...` lines keyed by node token.
struct LabelLine {
  std::string node;
  std::vector<ClassId> classes;
};
std::vector<LabelLine> read_label_lines(const fs::path& path, LabelMode mode);

/// Labels keyed by integer node ids that must cover 0..N-1 exactly once.
LabelSet load_labels(const fs::path& path, LabelMode mode);

/// TU-format directory: DS_A.txt, DS_graph_indicator.txt,
/// DS_graph_labels.txt and optionally DS_node_labels.txt.
GraphCollection load_graph_collection(const fs::path& dir);

/// A node-classification dataset with labels (and optional features) aligned
/// to the edge list's internal ids. Nodes that only appear in the label or
/// feature file become isolated nodes. Feature row r belongs to node token "r".
struct NodeDataset {
  Graph graph;
  NodeIdMap ids;
  LabelSet labels;
  std::optional<FeatureMatrix> features;
};
NodeDataset load_node_dataset(const fs::path& edges, const fs::path& labels, LabelMode mode,
                              const std::optional<fs::path>& features = std::nullopt,
                              const EdgeListOptions& options = {});

/// Internal ids in the order rows should be written to disk: original integer
/// order when the map is dense-integer, internal order otherwise.
std::vector<NodeId> output_row_order(const NodeIdMap& ids);

/// Reorders rows of `x` (indexed by internal id) into `output_row_order`.
FeatureMatrix to_output_order(const FeatureMatrix& x, const NodeIdMap& ids);

}  // namespace featforge
