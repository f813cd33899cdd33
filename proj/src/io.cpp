#include "featforge/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

namespace featforge {
namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n\v\f";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_char(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

bool is_content(std::string_view line) {
  auto t = trim(line);
  return !t.empty() && t.front() != '#';
}

std::string format_double(double v) {
  char buf[32];
  int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest representation that round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char tmp[32];
    int l = std::snprintf(tmp, sizeof tmp, "%.*g", prec, v);
    if (std::strtod(tmp, nullptr) == v) return std::string(tmp, static_cast<std::size_t>(l));
  }
  return std::string(buf, static_cast<std::size_t>(len));
}

/// Integer-valued per-line file (one value per line), comments/blank skipped.
std::vector<long long> read_int_column(const fs::path& path) {
  auto in = open_input(path);
  std::vector<long long> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty()) continue;
    auto v = parse_number<long long>(t);
    if (!v) throw ParseError(path.string(), lineno, "expected an integer, got '" + std::string(t) + "'");
    out.push_back(*v);
  }
  return out;
}

}  // namespace

NodeIdMap::NodeIdMap(std::vector<std::string> tokens) {
  for (auto& t : tokens) {
    if (index_.contains(t)) throw Error("duplicate node token '" + t + "' in id map");
    index_.emplace(t, static_cast<NodeId>(tokens_.size()));
    tokens_.push_back(std::move(t));
  }
}

NodeIdMap NodeIdMap::identity(std::size_t n) {
  std::vector<std::string> tokens(n);
  for (std::size_t i = 0; i < n; ++i) tokens[i] = std::to_string(i);
  return NodeIdMap(std::move(tokens));
}

NodeId NodeIdMap::intern(std::string_view token) {
  std::string key(token);
  auto [it, inserted] = index_.emplace(key, static_cast<NodeId>(tokens_.size()));
  if (inserted) tokens_.push_back(std::move(key));
  return it->second;
}

std::optional<NodeId> NodeIdMap::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool NodeIdMap::is_dense_integer() const {
  std::vector<bool> seen(tokens_.size(), false);
  for (const auto& t : tokens_) {
    auto v = parse_number<std::size_t>(t);
    if (!v || *v >= tokens_.size() || seen[*v] || std::to_string(*v) != t) return false;
    seen[*v] = true;
  }
  return true;
}

LoadedGraph read_edge_list(const fs::path& path, const EdgeListOptions& options) {
  auto in = open_input(path);
  NodeIdMap ids;
  for (const auto& t : options.preset_ids) {
    if (ids.find(t)) throw Error("duplicate preset node token '" + t + "'");
    ids.intern(t);
  }

  std::vector<std::pair<NodeId, NodeId>> edges;
  std::set<std::pair<NodeId, NodeId>> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body(line);
    if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    auto tokens = split_ws(body);
    if (tokens.empty()) continue;
    if (tokens.size() != 2)
      throw ParseError(path.string(), lineno,
                       "expected two node tokens, found " + std::to_string(tokens.size()) +
                           (tokens.size() > 2 ? " (weighted input is not supported)" : ""));
    NodeId u = ids.intern(tokens[0]);
    NodeId v = ids.intern(tokens[1]);
    if (u == v) {
      if (options.drop_self_loops) continue;
      throw ParseError(path.string(), lineno, "self-loop on node '" + std::string(tokens[0]) + "'");
    }
    auto key = std::minmax(u, v);
    if (!seen.insert(key).second) {
      if (options.dedup) continue;
      throw ParseError(path.string(), lineno,
                       "duplicate edge '" + std::string(tokens[0]) + " " + std::string(tokens[1]) + "'");
    }
    edges.push_back(key);
  }
  if (ids.size() == 0)
    throw ParseError(path.string(), 0, "edge list is empty");

  LoadedGraph out;
  out.graph = Graph::from_edges(ids.size(), edges);
  out.ids = std::move(ids);
  return out;
}

void write_edge_list(const fs::path& path, const Graph& g) {
  auto out = open_output(path);
  out << "# nodes " << g.node_count() << " edges " << g.edge_count() << '\n';
  for (auto [u, v] : g.edge_list()) out << u << ' ' << v << '\n';
}

void write_id_map(const fs::path& path, const NodeIdMap& ids) {
  auto out = open_output(path);
  out << "# internal_id original_token\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out << i << ' ' << ids.token(static_cast<NodeId>(i)) << '\n';
}

NodeIdMap load_id_map(const fs::path& path) {
  auto in = open_input(path);
  std::vector<std::string> tokens;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!is_content(line)) continue;
    auto parts = split_ws(line);
    auto idx = parts.size() == 2 ? parse_number<std::size_t>(parts[0]) : std::nullopt;
    if (!idx || *idx != tokens.size())
      throw ParseError(path.string(), lineno, "expected '<internal id> <token>' in id order");
    tokens.emplace_back(parts[1]);
  }
  return NodeIdMap(std::move(tokens));
}

FeatureMatrix load_feature_matrix(const fs::path& path) {
  auto in = open_input(path);
  std::vector<double> values;
  std::size_t dim = 0, rows = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!is_content(line)) continue;
    auto cells = split_char(trim(line), ',');
    if (rows == 0) dim = cells.size();
    if (cells.size() != dim)
      throw ParseError(path.string(), lineno,
                       "ragged row: " + std::to_string(cells.size()) + " cells, expected " + std::to_string(dim));
    for (auto c : cells) {
      auto v = parse_number<double>(c);
      if (!v || !std::isfinite(*v))
        throw ParseError(path.string(), lineno, "non-numeric cell '" + std::string(c) + "'");
      values.push_back(*v);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(path.string(), 0, "feature file is empty");
  FeatureMatrix::Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  std::copy(values.begin(), values.end(), m.data());
  return FeatureMatrix(std::move(m));
}

std::string format_feature_csv(const FeatureMatrix& x) {
  std::string out;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.dim(); ++c) {
      if (c) out += ',';
      out += format_double(x(r, c));
    }
    out += '\n';
  }
  return out;
}

void write_feature_matrix(const fs::path& path, const FeatureMatrix& x) {
  auto out = open_output(path);
  out << format_feature_csv(x);
}

std::vector<LabelLine> read_label_lines(const fs::path& path, LabelMode mode) {
  auto in = open_input(path);
  std::vector<LabelLine> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!is_content(line)) continue;
    auto parts = split_ws(line);
    if (parts.size() != 2)
      throw ParseError(path.string(), lineno,
                       mode == LabelMode::single ? "expected 'node label'" : "expected 'node l1,l2,...'");
    LabelLine entry{std::string(parts[0]), {}};
    auto cells = split_char(parts[1], ',');
    if (mode == LabelMode::single && cells.size() != 1)
      throw ParseError(path.string(), lineno, "several labels in single-label mode");
    for (auto c : cells) {
      if (c.empty()) continue;
      auto v = parse_number<ClassId>(c);
      if (!v || *v < 0) throw ParseError(path.string(), lineno, "invalid class id '" + std::string(c) + "'");
      entry.classes.push_back(*v);
    }
    if (entry.classes.empty()) throw ParseError(path.string(), lineno, "empty label set");
    out.push_back(std::move(entry));
  }
  if (out.empty()) throw ParseError(path.string(), 0, "label file is empty");
  return out;
}

namespace {

std::size_t infer_num_classes(const std::vector<LabelLine>& lines) {
  ClassId top = 0;
  for (const auto& l : lines)
    for (ClassId c : l.classes) top = std::max(top, c);
  return static_cast<std::size_t>(top) + 1;
}

}  // namespace

LabelSet load_labels(const fs::path& path, LabelMode mode) {
  auto lines = read_label_lines(path, mode);
  const std::size_t num_classes = infer_num_classes(lines);
  std::vector<std::vector<ClassId>> assignments(lines.size());
  std::vector<bool> seen(lines.size(), false);
  for (auto& l : lines) {
    auto id = parse_number<std::size_t>(l.node);
    if (!id) throw Error(path.string() + ": node id '" + l.node + "' is not an integer");
    if (*id >= lines.size())
      throw Error(path.string() + ": node ids are not contiguous; missing node(s) below " + l.node);
    if (seen[*id]) throw Error(path.string() + ": duplicate node " + l.node);
    seen[*id] = true;
    assignments[*id] = std::move(l.classes);
  }
  return LabelSet(mode, num_classes, std::move(assignments));
}

GraphCollection load_graph_collection(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(dir.string() + " is not a directory");
  std::string prefix;
  for (const auto& entry : fs::directory_iterator(dir)) {
    auto name = entry.path().filename().string();
    if (name.size() > 6 && name.ends_with("_A.txt")) {
      prefix = name.substr(0, name.size() - 6);
      break;
    }
  }
  if (prefix.empty()) throw Error(dir.string() + ": no *_A.txt file found");
  auto file = [&](const char* suffix) { return dir / (prefix + suffix); };

  auto indicator = read_int_column(file("_graph_indicator.txt"));
  auto raw_graph_labels = read_int_column(file("_graph_labels.txt"));
  const std::size_t total_nodes = indicator.size();
  const std::size_t num_graphs = raw_graph_labels.size();
  if (num_graphs == 0) throw Error("collection has no graphs");

  std::vector<std::size_t> graph_of(total_nodes), local_id(total_nodes);
  std::vector<std::size_t> sizes(num_graphs, 0);
  for (std::size_t i = 0; i < total_nodes; ++i) {
    long long gid = indicator[i];
    if (gid < 1 || static_cast<std::size_t>(gid) > num_graphs)
      throw ParseError(file("_graph_indicator.txt").string(), i + 1,
                       "graph id " + std::to_string(gid) + " outside 1.." + std::to_string(num_graphs));
    graph_of[i] = static_cast<std::size_t>(gid - 1);
    local_id[i] = sizes[graph_of[i]]++;
  }
  for (std::size_t g = 0; g < num_graphs; ++g)
    if (sizes[g] == 0)
      throw Error(file("_graph_indicator.txt").string() + ": graph " + std::to_string(g + 1) +
                  " has no nodes (indicator gap)");

  std::vector<std::vector<std::pair<NodeId, NodeId>>> edges(num_graphs);
  {
    auto path = file("_A.txt");
    auto in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    std::set<std::tuple<std::size_t, NodeId, NodeId>> seen;
    while (std::getline(in, line)) {
      ++lineno;
      if (!is_content(line)) continue;
      auto cells = split_char(trim(line), ',');
      std::optional<long long> a, b;
      if (cells.size() == 2) {
        a = parse_number<long long>(cells[0]);
        b = parse_number<long long>(cells[1]);
      }
      if (!a || !b) throw ParseError(path.string(), lineno, "expected 'u, v'");
      if (*a < 1 || *b < 1 || static_cast<std::size_t>(*a) > total_nodes ||
          static_cast<std::size_t>(*b) > total_nodes)
        throw ParseError(path.string(), lineno, "node id outside 1.." + std::to_string(total_nodes));
      auto u = static_cast<std::size_t>(*a - 1), v = static_cast<std::size_t>(*b - 1);
      if (graph_of[u] != graph_of[v])
        throw ParseError(path.string(), lineno, "edge crosses graphs " + std::to_string(graph_of[u] + 1) +
                                                    " and " + std::to_string(graph_of[v] + 1));
      if (u == v) continue;
      auto lu = static_cast<NodeId>(local_id[u]), lv = static_cast<NodeId>(local_id[v]);
      auto [lo, hi] = std::minmax(lu, lv);
      if (seen.emplace(graph_of[u], lo, hi).second) edges[graph_of[u]].emplace_back(lo, hi);
    }
  }

  GraphCollection coll;
  coll.graphs.reserve(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) coll.graphs.push_back(Graph::from_edges(sizes[g], edges[g]));

  std::map<long long, ClassId> label_index;
  for (long long l : raw_graph_labels) label_index.emplace(l, 0);
  ClassId next = 0;
  for (auto& [raw, id] : label_index) id = next++;
  coll.num_classes = label_index.size();
  for (long long l : raw_graph_labels) coll.graph_labels.push_back(label_index[l]);

  if (auto node_label_path = file("_node_labels.txt"); fs::exists(node_label_path)) {
    auto node_labels = read_int_column(node_label_path);
    if (node_labels.size() != total_nodes)
      throw Error(node_label_path.string() + ": expected " + std::to_string(total_nodes) + " node labels");
    std::map<long long, std::size_t> alphabet;
    for (long long l : node_labels) alphabet.emplace(l, 0);
    std::size_t k = 0;
    for (auto& [raw, idx] : alphabet) idx = k++;
    std::vector<FeatureMatrix> feats;
    feats.reserve(num_graphs);
    for (std::size_t g = 0; g < num_graphs; ++g) feats.emplace_back(sizes[g], alphabet.size());
    for (std::size_t i = 0; i < total_nodes; ++i) feats[graph_of[i]](local_id[i], alphabet[node_labels[i]]) = 1.0;
    coll.node_features = std::move(feats);
  }
  coll.validate();
  return coll;
}

NodeDataset load_node_dataset(const fs::path& edges, const fs::path& labels, LabelMode mode,
                              const std::optional<fs::path>& features, const EdgeListOptions& options) {
  auto loaded = read_edge_list(edges, options);
  NodeIdMap ids = std::move(loaded.ids);
  const std::size_t edge_nodes = ids.size();

  auto label_lines = read_label_lines(labels, mode);
  for (const auto& l : label_lines) ids.intern(l.node);

  std::optional<FeatureMatrix> raw_features;
  if (features) {
    raw_features = load_feature_matrix(*features);
    for (std::size_t r = 0; r < raw_features->rows(); ++r) ids.intern(std::to_string(r));
  }

  const std::size_t n = ids.size();
  NodeDataset out;
  if (n == edge_nodes) {
    out.graph = std::move(loaded.graph);
  } else {
    out.graph = Graph::from_edges(n, loaded.graph.edge_list());
  }

  std::vector<std::vector<ClassId>> assignments(n);
  std::vector<bool> seen(n, false);
  for (auto& l : label_lines) {
    NodeId id = *ids.find(l.node);
    if (seen[id]) throw Error(labels.string() + ": duplicate node " + l.node);
    seen[id] = true;
    assignments[id] = std::move(l.classes);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) throw Error(labels.string() + ": missing label for node '" + ids.token(static_cast<NodeId>(i)) + "'");
  std::size_t num_classes = 0;
  for (const auto& a : assignments)
    for (ClassId c : a) num_classes = std::max(num_classes, static_cast<std::size_t>(c) + 1);
  out.labels = LabelSet(mode, num_classes, std::move(assignments));

  if (raw_features) {
    FeatureMatrix aligned(n, raw_features->dim());
    for (std::size_t i = 0; i < n; ++i) {
      auto row = parse_number<std::size_t>(ids.token(static_cast<NodeId>(i)));
      if (!row || *row >= raw_features->rows())
        throw Error(features->string() + ": no feature row for node '" + ids.token(static_cast<NodeId>(i)) + "'");
      aligned.values().row(static_cast<Eigen::Index>(i)) = raw_features->values().row(static_cast<Eigen::Index>(*row));
    }
    out.features = std::move(aligned);
  }
  out.ids = std::move(ids);
  return out;
}

std::vector<NodeId> output_row_order(const NodeIdMap& ids) {
  std::vector<NodeId> order(ids.size());
  if (ids.is_dense_integer()) {
    for (std::size_t i = 0; i < ids.size(); ++i)
      order[*parse_number<std::size_t>(ids.token(static_cast<NodeId>(i)))] = static_cast<NodeId>(i);
  } else {
    for (std::size_t i = 0; i < ids.size(); ++i) order[i] = static_cast<NodeId>(i);
  }
  return order;
}

FeatureMatrix to_output_order(const FeatureMatrix& x, const NodeIdMap& ids) {
  if (x.rows() != ids.size()) throw Error("feature rows do not match the id map");
  auto order = output_row_order(ids);
  FeatureMatrix out(x.rows(), x.dim());
  for (std::size_t r = 0; r < order.size(); ++r)
    out.values().row(static_cast<Eigen::Index>(r)) = x.values().row(static_cast<Eigen::Index>(order[r]));
  return out;
}

}  // namespace featforge
