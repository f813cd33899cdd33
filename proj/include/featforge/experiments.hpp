#pragma once

#include "featforge/centrality.hpp"
#include "featforge/graph.hpp"
#include "featforge/sgc.hpp"
#include "featforge/spectral_embed.hpp"
#include "featforge/walk_embed.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace featforge {

// ---------------------------------------------------------------------------
// Splits and shuffling

struct SplitSpec {
  double train_fraction = 0.1;
  double val_fraction = 0.0;
  std::uint64_t seed = 0;
  bool stratified = true;
  /// When set, take this many training nodes per class instead of a
  /// fraction (Planetoid-style "20 per class").
  std::optional<std::size_t> per_class_train;

  void validate() const;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Disjoint, covering, sorted index sets. Stratified mode splits every class
/// separately (multi-label nodes are stratified by their smallest class);
/// each class keeps round(n_c * fraction) training nodes, at least one.
Split make_split(std::size_t n, const LabelSet& labels, const SplitSpec& spec);

/// Seeded Fisher-Yates permutation: for i = n-1..1 swap perm[i] with
/// perm[j], j uniform in [0, i].
std::vector<std::size_t> shuffle_permutation(std::size_t n, std::uint64_t seed);

/// out[i] = x[perm[i]] with perm = shuffle_permutation(rows, seed).
FeatureMatrix shuffle_feature_rows(const FeatureMatrix& x, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Metrics

/// Pooled over all (node, class) decisions: 2TP / (2TP + FP + FN).
double micro_f1(const LabelSet& pred, const LabelSet& truth);

/// Unweighted mean of per-class F1. A class absent from both prediction and
/// truth scores 0.
double macro_f1(const LabelSet& pred, const LabelSet& truth);

struct MetricPair {
  double micro = 0.0;
  double macro = 0.0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

struct RunAggregate {
  MeanStd micro;
  MeanStd macro;
};

RunAggregate aggregate_runs(std::span<const MetricPair> per_run);

struct MetricsReport {
  /// False when the initializer was skipped (rendered as N/A).
  bool computed = true;
  std::vector<MetricPair> per_run;
  MeanStd micro;
  MeanStd macro;
  double wall_time_s = 0.0;
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Pipelines

enum class Initializer { degree, pagerank, triangles, egonet, kcore, coloring, clique, real, deepwalk, hope };
enum class GnnKind { sgc, none };

std::string_view to_string(Initializer init);
std::string_view to_string(GnnKind gnn);
Initializer parse_initializer(std::string_view name);
GnnKind parse_gnn(std::string_view name);
/// Row label used in rendered tables, e.g. "k-core no.".
std::string_view display_name(Initializer init);

struct ExperimentConfig {
  Initializer initializer = Initializer::degree;
  GnnKind gnn = GnnKind::sgc;
  std::size_t runs = 10;
  SplitSpec split;
  WalkConfig walk;
  HopeConfig hope;
  SgcConfig sgc;
  CentralityConfig centrality;
  bool shuffle = false;
  /// Run r uses seed + r for its split and shuffle. Learned initializers are
  /// trained once, from this seed.
  std::uint64_t seed = 0;
  /// Triangles and egonet are reported as not computed on graphs with more
  /// edges than this. 0 disables the cap.
  std::size_t local_count_edge_cap = 0;
  /// Worker threads for independent runs and per-graph initializers.
  std::size_t threads = 1;

  void validate() const;
};

struct InitializerOutput {
  std::optional<FeatureMatrix> features;  // empty when skipped
  std::vector<std::string> warnings;
};

/// Initial node features for `g`. `real_features` is required for
/// Initializer::real; the learned initializers take their seed from `seed`.
InitializerOutput compute_initializer(const Graph& g, const ExperimentConfig& cfg, const FeatureMatrix* real_features,
                                      std::uint64_t seed);

/// initializer -> optional shuffle -> optional SGC propagation -> standardize
/// -> fit on train -> predict test -> F1, repeated cfg.runs times.
MetricsReport run_node_classification(const Graph& g, const LabelSet& labels, const ExperimentConfig& cfg,
                                      const FeatureMatrix* real_features = nullptr);

/// The same pipeline from precomputed initial features.
MetricsReport run_node_classification_from_features(const Graph& g, const LabelSet& labels,
                                                    const FeatureMatrix& initial, const ExperimentConfig& cfg);

/// Column-wise mean of the rows.
Eigen::VectorXd mean_pool(const FeatureMatrix& x);

/// One pooled embedding row per graph (initializer computed on each graph in
/// isolation, optionally propagated within the graph).
FeatureMatrix graph_embeddings(const GraphCollection& coll, const ExperimentConfig& cfg,
                               std::vector<std::string>* warnings = nullptr);

/// Pooled graph embeddings -> standardize -> stratified split over graphs ->
/// softmax classifier -> F1, repeated cfg.runs times.
MetricsReport run_graph_classification(const GraphCollection& coll, const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Reports

struct ResultRow {
  std::string dataset;
  Initializer initializer = Initializer::degree;
  GnnKind gnn = GnnKind::sgc;
  bool shuffle = false;
  MetricsReport report;
};

/// dataset,initializer,gnn,shuffle,micro_mean,micro_std,macro_mean,macro_std,runs,wall_time_s
std::string results_csv(std::span<const ResultRow> rows);

/// Initializers as rows (grouped by GNN, then shuffle), datasets as columns,
/// cells "mean±std". With include_macro each dataset gets Micro/Macro columns.
std::string results_markdown(std::span<const ResultRow> rows, bool include_macro);

}  // namespace featforge
