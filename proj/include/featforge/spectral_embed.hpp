#pragma once

#include "featforge/graph.hpp"

#include <cstdint>
#include <functional>

namespace featforge {

using DenseMatrix = Eigen::MatrixXd;

struct HopeConfig {
  std::size_t dim = 128;
  /// beta = decay_factor / spectral_radius(A); must lie in (0, 1).
  double decay_factor = 0.5;
  /// Iterations for the spectral radius estimate.
  std::size_t power_iters = 100;
  std::size_t svd_oversampling = 10;
  std::size_t svd_power_steps = 4;
  double solver_tol = 1e-10;
  std::uint64_t seed = 0;

  void validate() const;
};

/// A matrix known only through its products with blocks of vectors.
struct LinearOperator {
  std::size_t rows = 0;
  std::size_t cols = 0;
  /// M * X for X with `cols` rows.
  std::function<DenseMatrix(const DenseMatrix&)> apply;
  /// M^T * X for X with `rows` rows.
  std::function<DenseMatrix(const DenseMatrix&)> apply_transpose;

  static LinearOperator from_dense(DenseMatrix m);
};

/// Largest eigenvalue magnitude of A by power iteration from a positive
/// vector; the estimate is sqrt(x^T A^2 x) for unit x, which also converges on
/// bipartite graphs where the +rho and -rho components never separate.
/// Returns 0 for a graph without edges.
double estimate_spectral_radius(const Graph& g, std::size_t iters, std::uint64_t seed = 0);

/// A * X, X with node_count rows.
DenseMatrix adjacency_apply(const Graph& g, const DenseMatrix& x);

/// S * X with S = (I - beta A)^-1 (beta A), by the fixed point
/// y <- beta A x + beta A y until the L2 change of the block drops below tol.
/// Throws Error when the iteration fails to converge (beta too large).
DenseMatrix katz_apply(const Graph& g, double beta, const DenseMatrix& x, double tol,
                       std::size_t max_iterations = 10000);
Eigen::VectorXd katz_apply(const Graph& g, double beta, const Eigen::VectorXd& x, double tol);

struct TruncatedSvd {
  DenseMatrix u;          // rows x k, orthonormal columns
  Eigen::VectorXd sigma;  // k, non-increasing
  DenseMatrix v;          // cols x k, orthonormal columns
};

/// Randomized range finder with power steps and re-orthonormalization; the
/// small projected core is decomposed densely.
TruncatedSvd truncated_svd(const LinearOperator& op, std::size_t k, const HopeConfig& cfg);

struct HopeFactorization {
  double beta = 0.0;
  double spectral_radius = 0.0;
  /// Effective rank (cfg.dim clamped to the node count).
  std::size_t dim = 0;
  bool dim_clamped = false;
  TruncatedSvd svd;
};

/// Katz operator of g factorized to rank min(cfg.dim, n).
HopeFactorization hope_factorize(const Graph& g, const HopeConfig& cfg);

/// Source embeddings U * diag(sqrt(sigma)).
FeatureMatrix hope_embed(const Graph& g, const HopeConfig& cfg);

}  // namespace featforge
