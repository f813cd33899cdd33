#pragma once

#include "featforge/graph.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace featforge {

enum class ClassifierMode { softmax, one_vs_rest };

struct SgcConfig {
  std::size_t hops = 2;
  double l2_weight = 5e-6;
  double learning_rate = 0.2;
  std::size_t max_epochs = 300;
  double convergence_tol = 1e-6;
  ClassifierMode classifier_mode = ClassifierMode::softmax;
  std::uint64_t seed = 0;

  void validate() const;
};

/// S^K X with S = D^-1/2 (A + I) D^-1/2, as K sparse products.
FeatureMatrix propagate(const Graph& g, const FeatureMatrix& x, std::size_t hops);

/// Per-column z-score (population variance). Zero-variance columns become 0.
FeatureMatrix standardize(const FeatureMatrix& x);

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Linear scores X W + 1 b^T.
struct LinearClassifier {
  Matrix weights;  // dim x C
  Vector bias;     // C
  ClassifierMode mode = ClassifierMode::softmax;

  std::size_t dim() const { return static_cast<std::size_t>(weights.rows()); }
  std::size_t num_classes() const { return static_cast<std::size_t>(weights.cols()); }
  Matrix scores(const FeatureMatrix& x) const;
};

/// Mean cross-entropy of softmax(X W + b) against one-hot targets Y (n x C)
/// plus l2 * ||W||_F^2. Gradients are written when the outputs are non-null.
double softmax_objective(const Matrix& x, const Matrix& y, const Matrix& w, const Vector& b, double l2,
                         Matrix* grad_w = nullptr, Vector* grad_b = nullptr);

/// Mean binary cross-entropy of sigmoid(X w + b) against 0/1 targets plus
/// l2 * ||w||^2.
double logistic_objective(const Matrix& x, const Vector& y, const Vector& w, double b, double l2,
                          Vector* grad_w = nullptr, double* grad_b = nullptr);

struct TrainingTrace {
  /// Loss after every accepted step (entry 0 is the initial loss). For
  /// one-vs-rest the per-class traces are concatenated.
  std::vector<double> losses;
  std::size_t epochs = 0;
  std::size_t rejected_steps = 0;
};

/// Full-batch gradient descent from zero weights. A step that raises the loss
/// is rejected and the learning rate halved; training stops when the loss
/// improves by less than convergence_tol or after max_epochs.
LinearClassifier fit_classifier(const FeatureMatrix& x_train, const LabelSet& y_train, const SgcConfig& cfg,
                                TrainingTrace* trace = nullptr);

/// softmax: argmax per row (ties to the lowest class id).
/// one_vs_rest with counts: the top-k_i scoring classes of row i.
/// one_vs_rest without counts: classes with positive score (argmax if none).
LabelSet predict(const LinearClassifier& model, const FeatureMatrix& x,
                 std::optional<std::span<const std::size_t>> multi_label_counts = std::nullopt);

/// Writes `<prefix>.json` (mode, dims, classes) and `<prefix>.weights.csv`
/// (dim rows of weights followed by one bias row).
void save_classifier(const std::filesystem::path& prefix, const LinearClassifier& model);
LinearClassifier load_classifier(const std::filesystem::path& prefix);

}  // namespace featforge
