#include "featforge/walk_embed.hpp"

#include "featforge/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace featforge {
namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

/// -log s(x), stable for large |x|.
double neg_log_sigmoid(double x) { return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x)); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::span<const double> row_of(const SkipGramModel::Matrix& m, NodeId r) {
  return {m.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(m.cols()),
          static_cast<std::size_t>(m.cols())};
}

/// Relaxed atomic access for the concurrent training mode; plain access otherwise.
template <bool Concurrent>
struct Access {
  static double load(const double* p) {
    if constexpr (Concurrent) {
      return std::atomic_ref<double>(*const_cast<double*>(p)).load(std::memory_order_relaxed);
    } else {
      return *p;
    }
  }
  static void store(double* p, double v) {
    if constexpr (Concurrent) {
      std::atomic_ref<double>(*p).store(v, std::memory_order_relaxed);
    } else {
      *p = v;
    }
  }
};

/// One SGD step for a pair: targets are the context (label 1) followed by
/// the negatives (label 0). Negatives equal to the context are skipped.
template <bool Concurrent>
void pair_step(double* in, double* out, std::size_t dim, NodeId center, NodeId context,
               std::span<const NodeId> negatives, double lr, std::vector<double>& center_grad) {
  using A = Access<Concurrent>;
  double* v = in + static_cast<std::size_t>(center) * dim;
  std::fill(center_grad.begin(), center_grad.end(), 0.0);
  auto update = [&](NodeId target, double label) {
    double* u = out + static_cast<std::size_t>(target) * dim;
    double f = 0.0;
    for (std::size_t i = 0; i < dim; ++i) f += A::load(v + i) * A::load(u + i);
    double g = lr * (label - sigmoid(f));
    for (std::size_t i = 0; i < dim; ++i) {
      double ui = A::load(u + i);
      center_grad[i] += g * ui;
      A::store(u + i, ui + g * A::load(v + i));
    }
  };
  update(context, 1.0);
  for (NodeId neg : negatives)
    if (neg != context) update(neg, 0.0);
  for (std::size_t i = 0; i < dim; ++i) A::store(v + i, A::load(v + i) + center_grad[i]);
}

/// Unigram^(3/4) sampler over node frequencies in the walk corpus.
class NegativeSampler {
 public:
  NegativeSampler(const std::vector<Walk>& walks, std::size_t n) {
    std::vector<double> counts(n, 0.0);
    for (const auto& w : walks)
      for (NodeId v : w) counts[v] += 1.0;
    for (auto& c : counts) c = std::pow(c, 0.75);
    dist_ = std::discrete_distribution<NodeId>(counts.begin(), counts.end());
  }
  NodeId operator()(Rng& rng) { return dist_(rng); }

 private:
  std::discrete_distribution<NodeId> dist_;
};

template <bool Concurrent>
void train_shard(SkipGramModel& model, const std::vector<Walk>& walks, std::size_t first,
                 std::size_t last, const WalkConfig& cfg, NegativeSampler sampler, Rng rng,
                 std::size_t epoch, std::size_t total_tokens, std::size_t tokens_before,
                 std::atomic<std::size_t>* shared_progress) {
  const std::size_t dim = cfg.dim;
  const double min_lr = cfg.initial_lr / 100.0;
  const double total_work = static_cast<double>(cfg.epochs * total_tokens);
  std::vector<double> center_grad(dim);
  std::vector<NodeId> negs(cfg.negatives);
  std::size_t local_tokens = 0;
  for (std::size_t w = first; w < last; ++w) {
    const Walk& walk = walks[w];
    std::size_t processed = shared_progress ? shared_progress->fetch_add(walk.size(), std::memory_order_relaxed)
                                            : tokens_before + local_tokens;
    double progress = (static_cast<double>(epoch * total_tokens) + static_cast<double>(processed)) / total_work;
    double lr = std::max(min_lr, cfg.initial_lr * (1.0 - 0.99 * progress));
    local_tokens += walk.size();
    for (std::size_t i = 0; i < walk.size(); ++i) {
      std::size_t lo = i >= cfg.window ? i - cfg.window : 0;
      std::size_t hi = std::min(walk.size() - 1, i + cfg.window);
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        for (auto& n : negs) n = sampler(rng);
        pair_step<Concurrent>(model.input.data(), model.output.data(), dim, walk[i], walk[j], negs, lr,
                              center_grad);
      }
    }
  }
}

}  // namespace

void WalkConfig::validate() const {
  if (walks_per_node == 0 || walk_length == 0 || window == 0 || dim == 0 || negatives == 0 || epochs == 0)
    throw Error("walk config: counts and sizes must be positive");
  if (window > walk_length) throw Error("walk config: window exceeds walk length");
  if (!(initial_lr > 0.0)) throw Error("walk config: learning rate must be positive");
  if (threads == 0) throw Error("walk config: threads must be positive");
}

std::vector<Walk> generate_walks(const Graph& g, const WalkConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const std::size_t n = g.node_count();
  const std::size_t total = n * cfg.walks_per_node;
  std::vector<NodeId> starts(total);
  for (std::size_t r = 0; r < cfg.walks_per_node; ++r) {
    auto first = starts.begin() + static_cast<std::ptrdiff_t>(r * n);
    std::iota(first, first + static_cast<std::ptrdiff_t>(n), NodeId{0});
    Rng rng = make_rng(seed, stream::walk_order, r);
    std::shuffle(first, first + static_cast<std::ptrdiff_t>(n), rng);
  }

  std::vector<Walk> walks(total);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t w = begin; w < end; ++w) {
      Rng rng = make_rng(seed, stream::walk_step, w);
      Walk& walk = walks[w];
      walk.reserve(cfg.walk_length);
      NodeId cur = starts[w];
      walk.push_back(cur);
      while (walk.size() < cfg.walk_length) {
        auto nb = g.neighbors(cur);
        if (nb.empty()) break;
        std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
        cur = nb[pick(rng)];
        walk.push_back(cur);
      }
    }
  };

  const std::size_t threads = std::min(cfg.threads, std::max<std::size_t>(total, 1));
  if (threads <= 1) {
    work(0, total);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back(work, total * t / threads, total * (t + 1) / threads);
  }
  return walks;
}

double sgns_pair_loss(std::span<const double> center, std::span<const double> context,
                      std::span<const std::span<const double>> negatives) {
  double loss = neg_log_sigmoid(dot(context, center));
  for (auto neg : negatives) loss += neg_log_sigmoid(-dot(neg, center));
  return loss;
}

SgnsGradient sgns_pair_gradient(std::span<const double> center, std::span<const double> context,
                                std::span<const std::span<const double>> negatives) {
  const std::size_t dim = center.size();
  SgnsGradient grad;
  grad.center.assign(dim, 0.0);
  // d/dx [-log s(x)] = s(x) - 1 ; d/dx [-log s(-x)] = s(x)
  double gc = sigmoid(dot(context, center)) - 1.0;
  grad.context.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    grad.context[i] = gc * center[i];
    grad.center[i] += gc * context[i];
  }
  for (auto neg : negatives) {
    double gn = sigmoid(dot(neg, center));
    auto& out = grad.negatives.emplace_back(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      out[i] = gn * center[i];
      grad.center[i] += gn * neg[i];
    }
  }
  return grad;
}

double sgns_total_loss(const SkipGramModel& model, std::span<const TrainingPair> pairs) {
  double total = 0.0;
  std::vector<std::span<const double>> negs;
  for (const auto& p : pairs) {
    negs.clear();
    for (NodeId k : p.negatives) negs.push_back(row_of(model.output, k));
    total += sgns_pair_loss(row_of(model.input, p.center), row_of(model.output, p.context), negs);
  }
  return total;
}

void sgns_full_batch_step(SkipGramModel& model, std::span<const TrainingPair> pairs, double lr) {
  SkipGramModel::Matrix gin = SkipGramModel::Matrix::Zero(model.input.rows(), model.input.cols());
  SkipGramModel::Matrix gout = SkipGramModel::Matrix::Zero(model.output.rows(), model.output.cols());
  std::vector<std::span<const double>> negs;
  for (const auto& p : pairs) {
    negs.clear();
    for (NodeId k : p.negatives) negs.push_back(row_of(model.output, k));
    auto g = sgns_pair_gradient(row_of(model.input, p.center), row_of(model.output, p.context), negs);
    for (std::size_t i = 0; i < g.center.size(); ++i) {
      gin(p.center, static_cast<Eigen::Index>(i)) += g.center[i];
      gout(p.context, static_cast<Eigen::Index>(i)) += g.context[i];
      for (std::size_t k = 0; k < p.negatives.size(); ++k)
        gout(p.negatives[k], static_cast<Eigen::Index>(i)) += g.negatives[k][i];
    }
  }
  model.input -= lr * gin;
  model.output -= lr * gout;
}

void sgns_sgd_step(SkipGramModel& model, NodeId center, NodeId context, std::span<const NodeId> negatives,
                   double lr) {
  std::vector<double> scratch(static_cast<std::size_t>(model.input.cols()));
  pair_step<false>(model.input.data(), model.output.data(), scratch.size(), center, context, negatives, lr,
                   scratch);
}

SkipGramModel train_skipgram(const std::vector<Walk>& walks, std::size_t node_count, const WalkConfig& cfg) {
  cfg.validate();
  if (walks.empty()) throw Error("skip-gram: no walks to train on");
  std::size_t total_tokens = 0;
  for (const auto& w : walks) {
    for (NodeId v : w)
      if (v >= node_count)
        throw Error("skip-gram: node id " + std::to_string(v) + " >= node count " + std::to_string(node_count));
    total_tokens += w.size();
  }
  if (total_tokens == 0) throw Error("skip-gram: walks are empty");

  const auto n = static_cast<Eigen::Index>(node_count);
  const auto dim = static_cast<Eigen::Index>(cfg.dim);
  SkipGramModel model;
  model.input.resize(n, dim);
  model.output = SkipGramModel::Matrix::Zero(n, dim);
  {
    Rng rng = make_rng(cfg.seed, stream::skipgram_init);
    std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(cfg.dim),
                                                0.5 / static_cast<double>(cfg.dim));
    for (Eigen::Index i = 0; i < model.input.size(); ++i) model.input.data()[i] = init(rng);
  }

  NegativeSampler sampler(walks, node_count);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.threads <= 1) {
      train_shard<false>(model, walks, 0, walks.size(), cfg, sampler, make_rng(cfg.seed, stream::skipgram_train, epoch),
                         epoch, total_tokens, 0, nullptr);
    } else {
      std::atomic<std::size_t> progress{0};
      std::vector<std::jthread> pool;
      const std::size_t t_count = std::min(cfg.threads, walks.size());
      for (std::size_t t = 0; t < t_count; ++t) {
        std::size_t first = walks.size() * t / t_count, last = walks.size() * (t + 1) / t_count;
        pool.emplace_back([&, first, last, t] {
          train_shard<true>(model, walks, first, last, cfg, sampler,
                            make_rng(cfg.seed, stream::skipgram_train, epoch * 1024 + t), epoch, total_tokens, 0,
                            &progress);
        });
      }
    }
  }
  return model;
}

FeatureMatrix deepwalk_embed(const Graph& g, const WalkConfig& cfg) {
  if (g.node_count() == 0) throw Error("deepwalk: empty graph");
  auto walks = generate_walks(g, cfg, cfg.seed);
  auto model = train_skipgram(walks, g.node_count(), cfg);
  return FeatureMatrix(std::move(model.input));
}

}  // namespace featforge
