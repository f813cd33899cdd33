#include "featforge/spectral_embed.hpp"

#include "featforge/rng.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace featforge {
namespace {

DenseMatrix orthonormal_basis(const DenseMatrix& y) {
  Eigen::HouseholderQR<DenseMatrix> qr(y);
  return qr.householderQ() * DenseMatrix::Identity(y.rows(), y.cols());
}

}  // namespace

void HopeConfig::validate() const {
  if (dim == 0) throw Error("hope config: dim must be positive");
  if (!(decay_factor > 0.0 && decay_factor < 1.0)) throw Error("hope config: decay_factor must lie in (0, 1)");
  if (power_iters == 0) throw Error("hope config: power_iters must be positive");
  if (svd_oversampling == 0) throw Error("hope config: svd_oversampling must be positive");
  if (!(solver_tol > 0.0)) throw Error("hope config: solver_tol must be positive");
}

LinearOperator LinearOperator::from_dense(DenseMatrix m) {
  LinearOperator op;
  op.rows = static_cast<std::size_t>(m.rows());
  op.cols = static_cast<std::size_t>(m.cols());
  auto shared = std::make_shared<const DenseMatrix>(std::move(m));
  op.apply = [shared](const DenseMatrix& x) -> DenseMatrix { return *shared * x; };
  op.apply_transpose = [shared](const DenseMatrix& x) -> DenseMatrix { return shared->transpose() * x; };
  return op;
}

DenseMatrix adjacency_apply(const Graph& g, const DenseMatrix& x) {
  if (static_cast<std::size_t>(x.rows()) != g.node_count()) throw Error("adjacency_apply: row mismatch");
  // Row-major scratch keeps neighbor gathers contiguous.
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor in = x;
  RowMajor out = RowMajor::Zero(x.rows(), x.cols());
  for (NodeId v = 0; v < g.node_count(); ++v)
    for (NodeId u : g.neighbors(v)) out.row(v) += in.row(u);
  return out;
}

double estimate_spectral_radius(const Graph& g, std::size_t iters, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  if (n == 0) throw Error("spectral radius of an empty graph");
  if (g.edge_count() == 0) return 0.0;
  Rng rng = make_rng(seed, stream::spectral_start);
  std::uniform_real_distribution<double> pos(0.5, 1.5);
  DenseMatrix x(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = pos(rng);
  x /= x.norm();
  double estimate = 0.0;
  for (std::size_t it = 0; it < std::max<std::size_t>(iters, 1); ++it) {
    DenseMatrix y = adjacency_apply(g, x);
    double norm = y.norm();
    if (norm == 0.0) return 0.0;
    bool settled = it > 0 && std::abs(norm - estimate) <= 1e-15 * norm;
    estimate = norm;
    x = y / norm;
    if (settled) break;
  }
  return estimate;
}

DenseMatrix katz_apply(const Graph& g, double beta, const DenseMatrix& x, double tol, std::size_t max_iterations) {
  if (static_cast<std::size_t>(x.rows()) != g.node_count()) throw Error("katz_apply: row mismatch");
  if (beta < 0.0) throw Error("katz_apply: beta must be non-negative");
  if (beta == 0.0) return DenseMatrix::Zero(x.rows(), x.cols());
  DenseMatrix z = beta * adjacency_apply(g, x);
  DenseMatrix y = z;
  double previous_change = std::numeric_limits<double>::infinity();
  std::size_t growth_streak = 0;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    DenseMatrix next = z + beta * adjacency_apply(g, y);
    double change = (next - y).norm();
    y.swap(next);
    if (!std::isfinite(change)) break;
    if (change < tol) return y;
    growth_streak = change > previous_change ? growth_streak + 1 : 0;
    if (growth_streak > 50) break;
    previous_change = change;
  }
  throw Error("katz_apply: Neumann iteration did not converge (beta * spectral radius must stay below 1)");
}

Eigen::VectorXd katz_apply(const Graph& g, double beta, const Eigen::VectorXd& x, double tol) {
  return katz_apply(g, beta, DenseMatrix(x), tol).col(0);
}

TruncatedSvd truncated_svd(const LinearOperator& op, std::size_t k, const HopeConfig& cfg) {
  const std::size_t limit = std::min(op.rows, op.cols);
  if (k == 0) throw Error("truncated_svd: rank must be positive");
  if (k > limit)
    throw Error("truncated_svd: rank " + std::to_string(k) + " exceeds operator size " + std::to_string(limit));
  const auto width = static_cast<Eigen::Index>(std::min(k + cfg.svd_oversampling, limit));

  Rng rng = make_rng(cfg.seed, stream::svd_test_matrix);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseMatrix omega(static_cast<Eigen::Index>(op.cols), width);
  for (Eigen::Index c = 0; c < omega.cols(); ++c)
    for (Eigen::Index r = 0; r < omega.rows(); ++r) omega(r, c) = gauss(rng);

  DenseMatrix q = orthonormal_basis(op.apply(omega));
  for (std::size_t step = 0; step < cfg.svd_power_steps; ++step) {
    DenseMatrix z = orthonormal_basis(op.apply_transpose(q));
    q = orthonormal_basis(op.apply(z));
  }

  // B = Q^T M, decomposed through its transpose M^T Q (cols x width).
  DenseMatrix bt = op.apply_transpose(q);
  Eigen::JacobiSVD<DenseMatrix> core(bt, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto kk = static_cast<Eigen::Index>(k);
  TruncatedSvd out;
  out.sigma = core.singularValues().head(kk);
  out.u = q * core.matrixV().leftCols(kk);
  out.v = core.matrixU().leftCols(kk);
  return out;
}

HopeFactorization hope_factorize(const Graph& g, const HopeConfig& cfg) {
  cfg.validate();
  const std::size_t n = g.node_count();
  if (g.edge_count() == 0) throw Error("hope: graph has no edges");
  HopeFactorization f;
  f.spectral_radius = estimate_spectral_radius(g, cfg.power_iters, cfg.seed);
  if (f.spectral_radius <= 0.0) throw Error("hope: spectral radius estimate is zero");
  f.beta = cfg.decay_factor / f.spectral_radius;
  f.dim = std::min(cfg.dim, n);
  f.dim_clamped = f.dim < cfg.dim;

  LinearOperator katz;
  katz.rows = katz.cols = n;
  const double beta = f.beta;
  const double tol = cfg.solver_tol;
  // S is symmetric for undirected graphs.
  katz.apply = [&g, beta, tol](const DenseMatrix& x) { return katz_apply(g, beta, x, tol); };
  katz.apply_transpose = katz.apply;
  f.svd = truncated_svd(katz, f.dim, cfg);
  return f;
}

FeatureMatrix hope_embed(const Graph& g, const HopeConfig& cfg) {
  auto f = hope_factorize(g, cfg);
  DenseMatrix emb = f.svd.u * f.svd.sigma.cwiseSqrt().asDiagonal();
  return FeatureMatrix(FeatureMatrix::Matrix(emb));
}

}  // namespace featforge
