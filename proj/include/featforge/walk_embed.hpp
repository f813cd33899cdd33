#pragma once

#include "featforge/graph.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace featforge {

struct WalkConfig {
  std::size_t walks_per_node = 10;
  std::size_t walk_length = 80;
  std::size_t window = 10;
  std::size_t dim = 128;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double initial_lr = 0.025;
  std::uint64_t seed = 0;
  /// 1 = sequential and deterministic. More threads parallelize walk
  /// generation (still deterministic) and switch training to lock-free
  /// concurrent updates, which are not reproducible run to run.
  std::size_t threads = 1;

  void validate() const;
};

using Walk = std::vector<NodeId>;

/// walks_per_node rounds; each round visits every node once in a shuffled
/// order and starts a walk there. Every walk uses its own RNG stream derived
/// from (seed, walk index), so the output does not depend on cfg.threads.
/// A walk stops early at a node without neighbors.
std::vector<Walk> generate_walks(const Graph& g, const WalkConfig& cfg, std::uint64_t seed);

/// Skip-gram parameters: input vectors are the node embeddings, output
/// vectors the context side.
struct SkipGramModel {
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Matrix input;
  Matrix output;
};

/// Negative-sampling loss of one (center, context) pair:
///   -log s(u_ctx . v_ctr) - sum_k log s(-u_neg_k . v_ctr)
double sgns_pair_loss(std::span<const double> center, std::span<const double> context,
                      std::span<const std::span<const double>> negatives);

struct SgnsGradient {
  std::vector<double> center;
  std::vector<double> context;
  std::vector<std::vector<double>> negatives;
};
SgnsGradient sgns_pair_gradient(std::span<const double> center, std::span<const double> context,
                                std::span<const std::span<const double>> negatives);

/// A pair with its negatives fixed up front, for deterministic objectives.
struct TrainingPair {
  NodeId center;
  NodeId context;
  std::vector<NodeId> negatives;
};
double sgns_total_loss(const SkipGramModel& model, std::span<const TrainingPair> pairs);
/// One full-batch gradient descent step on sgns_total_loss.
void sgns_full_batch_step(SkipGramModel& model, std::span<const TrainingPair> pairs, double lr);

/// In-place SGD step on one pair (the kernel used by train_skipgram).
void sgns_sgd_step(SkipGramModel& model, NodeId center, NodeId context,
                   std::span<const NodeId> negatives, double lr);

/// Trains over every (center, context) pair within cfg.window positions, for
/// cfg.epochs passes. Negatives come from the unigram^(3/4) distribution over
/// the walk corpus; the learning rate decays linearly to initial_lr / 100.
SkipGramModel train_skipgram(const std::vector<Walk>& walks, std::size_t node_count,
                             const WalkConfig& cfg);

/// generate_walks + train_skipgram; returns the input vectors.
FeatureMatrix deepwalk_embed(const Graph& g, const WalkConfig& cfg);

}  // namespace featforge
