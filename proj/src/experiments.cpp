#include "featforge/experiments.hpp"

#include "featforge/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iterator>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

namespace featforge {
namespace {

struct InitializerName {
  Initializer id;
  std::string_view key;
  std::string_view display;
};

constexpr InitializerName kInitializers[] = {
    {Initializer::degree, "degree", "degree"},
    {Initializer::pagerank, "pagerank", "pagerank"},
    {Initializer::triangles, "triangles", "#triangles"},
    {Initializer::egonet, "egonet", "egonet no."},
    {Initializer::kcore, "kcore", "k-core no."},
    {Initializer::coloring, "coloring", "coloring no."},
    {Initializer::clique, "clique", "clique no."},
    {Initializer::real, "real", "real features"},
    {Initializer::deepwalk, "deepwalk", "DeepWalk"},
    {Initializer::hope, "hope", "HOPE"},
};

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// written by exactly one worker, so results match the sequential order.
template <typename Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

FeatureMatrix rows_of(const FeatureMatrix& x, std::span<const std::size_t> rows) {
  FeatureMatrix out(rows.size(), x.dim());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.values().row(static_cast<Eigen::Index>(r)) = x.values().row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

/// Standardized classifier input, shuffled/propagated as configured.
FeatureMatrix prepare_features(const Graph& g, const FeatureMatrix& initial, const ExperimentConfig& cfg,
                               std::uint64_t run_seed) {
  FeatureMatrix x = cfg.shuffle ? shuffle_feature_rows(initial, run_seed) : initial;
  if (cfg.gnn == GnnKind::sgc) x = propagate(g, x, cfg.sgc.hops);
  return standardize(x);
}

MetricPair evaluate_split(const FeatureMatrix& x, const LabelSet& labels, const Split& split, SgcConfig sgc) {
  sgc.classifier_mode = labels.mode() == LabelMode::multi ? ClassifierMode::one_vs_rest : ClassifierMode::softmax;
  auto model = fit_classifier(rows_of(x, split.train), labels.subset(split.train), sgc);
  LabelSet truth = labels.subset(split.test);
  LabelSet pred;
  if (labels.mode() == LabelMode::multi) {
    auto counts = truth.label_counts();
    pred = predict(model, rows_of(x, split.test), std::span<const std::size_t>(counts));
  } else {
    pred = predict(model, rows_of(x, split.test));
  }
  return {micro_f1(pred, truth), macro_f1(pred, truth)};
}

void finish_report(MetricsReport& report) {
  auto agg = aggregate_runs(report.per_run);
  report.micro = agg.micro;
  report.macro = agg.macro;
}

void check_comparable(const LabelSet& pred, const LabelSet& truth) {
  if (pred.mode() != truth.mode()) throw Error("F1: prediction and truth label modes differ");
  if (pred.size() != truth.size()) throw Error("F1: prediction and truth cover different node counts");
}

}  // namespace

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0) && !per_class_train)
    throw Error("split: train_fraction must lie in (0, 1)");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw Error("split: val_fraction must lie in [0, 1)");
  if (!per_class_train && train_fraction + val_fraction >= 1.0)
    throw Error("split: train_fraction + val_fraction must stay below 1");
  if (per_class_train && *per_class_train == 0) throw Error("split: per-class training count must be positive");
}

namespace {

// Splits round(total * fraction) across strata: floors first, then the
// leftover units go to the largest remainders (lower index on ties).
std::vector<std::size_t> apportion(const std::vector<std::size_t>& sizes, double fraction) {
  std::size_t total = 0;
  for (auto m : sizes) total += m;
  const auto target = static_cast<std::size_t>(std::llround(static_cast<double>(total) * fraction));
  std::vector<std::size_t> quota(sizes.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t given = 0;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    const double exact = static_cast<double>(sizes[s]) * fraction;
    quota[s] = std::min(sizes[s], static_cast<std::size_t>(std::floor(exact)));
    given += quota[s];
    rem.emplace_back(exact - static_cast<double>(quota[s]), s);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [r, s] : rem) {
    if (given >= target) break;
    if (quota[s] < sizes[s]) {
      ++quota[s];
      ++given;
    }
  }
  return quota;
}

}  // namespace

Split make_split(std::size_t n, const LabelSet& labels, const SplitSpec& spec) {
  spec.validate();
  if (labels.size() != n) throw Error("split: label count does not match node count");
  Rng rng = make_rng(spec.seed, stream::split);

  std::vector<std::vector<std::size_t>> strata;
  if (spec.stratified) {
    if (n < labels.num_classes() && labels.mode() == LabelMode::single)
      throw Error("split: fewer nodes than classes");
    strata.resize(labels.num_classes());
    for (std::size_t i = 0; i < n; ++i) strata[static_cast<std::size_t>(labels.classes(i).front())].push_back(i);
    if (labels.mode() == LabelMode::single) {
      for (std::size_t c = 0; c < strata.size(); ++c)
        if (strata[c].empty())
          throw Error("split: stratified split impossible, class " + std::to_string(c) + " has no nodes");
    }
  } else {
    strata.emplace_back(n);
    std::iota(strata.back().begin(), strata.back().end(), std::size_t{0});
  }

  std::vector<std::size_t> sizes;
  for (const auto& members : strata) sizes.push_back(members.size());
  const auto train_quota = apportion(sizes, spec.train_fraction);
  const auto val_quota = apportion(sizes, spec.val_fraction);

  Split out;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    auto& members = strata[s];
    if (members.empty()) continue;
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t m = members.size();
    std::size_t train = spec.per_class_train ? std::min(*spec.per_class_train, m) : train_quota[s];
    if (spec.stratified) train = std::clamp<std::size_t>(train, 1, m);
    const std::size_t val = std::min(val_quota[s], m - train);
    out.train.insert(out.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(train));
    out.val.insert(out.val.end(), members.begin() + static_cast<std::ptrdiff_t>(train),
                   members.begin() + static_cast<std::ptrdiff_t>(train + val));
    out.test.insert(out.test.end(), members.begin() + static_cast<std::ptrdiff_t>(train + val), members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  if (out.train.empty()) throw Error("split: training set is empty");
  return out;
}

std::vector<std::size_t> shuffle_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = make_rng(seed, stream::shuffle);
  for (std::size_t i = n; i-- > 1;) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(perm[i], perm[pick(rng)]);
  }
  return perm;
}

FeatureMatrix shuffle_feature_rows(const FeatureMatrix& x, std::uint64_t seed) {
  return rows_of(x, shuffle_permutation(x.rows(), seed));
}

double micro_f1(const LabelSet& pred, const LabelSet& truth) {
  check_comparable(pred, truth);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    auto p = pred.classes(i), t = truth.classes(i);
    std::vector<ClassId> common;
    std::set_intersection(p.begin(), p.end(), t.begin(), t.end(), std::back_inserter(common));
    tp += common.size();
    fp += p.size() - common.size();
    fn += t.size() - common.size();
  }
  std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

double macro_f1(const LabelSet& pred, const LabelSet& truth) {
  check_comparable(pred, truth);
  const std::size_t C = std::max(pred.num_classes(), truth.num_classes());
  std::vector<std::size_t> tp(C, 0), fp(C, 0), fn(C, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    auto p = pred.classes(i), t = truth.classes(i);
    for (ClassId c : p) (std::binary_search(t.begin(), t.end(), c) ? tp : fp)[static_cast<std::size_t>(c)]++;
    for (ClassId c : t)
      if (!std::binary_search(p.begin(), p.end(), c)) fn[static_cast<std::size_t>(c)]++;
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    std::size_t denom = 2 * tp[c] + fp[c] + fn[c];
    if (denom) sum += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
  }
  return C == 0 ? 0.0 : sum / static_cast<double>(C);
}

RunAggregate aggregate_runs(std::span<const MetricPair> per_run) {
  if (per_run.empty()) throw Error("aggregate_runs: no runs");
  const auto r = static_cast<double>(per_run.size());
  RunAggregate out;
  for (const auto& m : per_run) {
    out.micro.mean += m.micro;
    out.macro.mean += m.macro;
  }
  out.micro.mean /= r;
  out.macro.mean /= r;
  for (const auto& m : per_run) {
    out.micro.std += (m.micro - out.micro.mean) * (m.micro - out.micro.mean);
    out.macro.std += (m.macro - out.macro.mean) * (m.macro - out.macro.mean);
  }
  out.micro.std = std::sqrt(out.micro.std / r);
  out.macro.std = std::sqrt(out.macro.std / r);
  return out;
}

std::string_view to_string(Initializer init) {
  for (const auto& e : kInitializers)
    if (e.id == init) return e.key;
  return "?";
}

std::string_view display_name(Initializer init) {
  for (const auto& e : kInitializers)
    if (e.id == init) return e.display;
  return "?";
}

std::string_view to_string(GnnKind gnn) { return gnn == GnnKind::sgc ? "sgc" : "none"; }

Initializer parse_initializer(std::string_view name) {
  for (const auto& e : kInitializers)
    if (e.key == name) return e.id;
  throw Error("unknown initializer '" + std::string(name) + "'");
}

GnnKind parse_gnn(std::string_view name) {
  if (name == "sgc") return GnnKind::sgc;
  if (name == "none") return GnnKind::none;
  throw Error("unknown gnn '" + std::string(name) + "' (expected sgc or none)");
}

void ExperimentConfig::validate() const {
  if (runs == 0) throw Error("experiment: runs must be positive");
  if (threads == 0) throw Error("experiment: threads must be positive");
  split.validate();
  sgc.validate();
  centrality.validate();
  if (initializer == Initializer::deepwalk) walk.validate();
  if (initializer == Initializer::hope) hope.validate();
}

InitializerOutput compute_initializer(const Graph& g, const ExperimentConfig& cfg, const FeatureMatrix* real_features,
                                      std::uint64_t seed) {
  InitializerOutput out;
  const bool capped = cfg.local_count_edge_cap != 0 && g.edge_count() > cfg.local_count_edge_cap;
  switch (cfg.initializer) {
    case Initializer::degree:
      out.features = degree_features(g);
      break;
    case Initializer::pagerank: {
      auto pr = pagerank_features(g, cfg.centrality);
      if (!pr.converged)
        out.warnings.push_back("pagerank stopped at max_iter=" + std::to_string(cfg.centrality.pagerank_max_iter) +
                               " before reaching tol");
      out.features = std::move(pr.features);
      break;
    }
    case Initializer::triangles:
    case Initializer::egonet:
      if (capped) {
        out.warnings.push_back(std::string(to_string(cfg.initializer)) + " not computed: " +
                               std::to_string(g.edge_count()) + " edges exceed the cap");
        break;
      }
      out.features = cfg.initializer == Initializer::triangles ? triangle_features(g) : egonet_features(g);
      break;
    case Initializer::kcore:
      out.features = kcore_features(g);
      break;
    case Initializer::coloring:
      out.features = coloring_features(g);
      break;
    case Initializer::clique: {
      auto cl = clique_features(g, cfg.centrality);
      if (cl.approximate) out.warnings.push_back("clique numbers are greedy lower bounds (graph above node cap)");
      out.features = std::move(cl.features);
      break;
    }
    case Initializer::real:
      if (!real_features) throw Error("initializer 'real' needs a feature matrix");
      if (real_features->rows() != g.node_count()) throw Error("real features do not match the node count");
      out.features = *real_features;
      break;
    case Initializer::deepwalk: {
      WalkConfig wc = cfg.walk;
      wc.seed = seed;
      out.features = deepwalk_embed(g, wc);
      break;
    }
    case Initializer::hope: {
      HopeConfig hc = cfg.hope;
      hc.seed = seed;
      if (g.edge_count() == 0) {
        out.warnings.push_back("hope: graph without edges embedded as zeros");
        out.features = FeatureMatrix(g.node_count(), hc.dim);
        break;
      }
      auto f = hope_factorize(g, hc);
      FeatureMatrix emb(g.node_count(), hc.dim);
      // Clamped rank: pad with zero columns so every graph shares one width.
      emb.values().leftCols(static_cast<Eigen::Index>(f.dim)) = f.svd.u * f.svd.sigma.cwiseSqrt().asDiagonal();
      if (f.dim_clamped)
        out.warnings.push_back("hope: dim clamped to node count " + std::to_string(f.dim));
      out.features = std::move(emb);
      break;
    }
  }
  return out;
}

MetricsReport run_node_classification_from_features(const Graph& g, const LabelSet& labels,
                                                    const FeatureMatrix& initial, const ExperimentConfig& cfg) {
  cfg.validate();
  if (labels.size() != g.node_count()) throw Error("labels do not match the node count");
  if (initial.rows() != g.node_count()) throw Error("initial features do not match the node count");
  auto start = std::chrono::steady_clock::now();
  MetricsReport report;
  report.per_run.resize(cfg.runs);

  std::optional<FeatureMatrix> shared;
  if (!cfg.shuffle) shared = prepare_features(g, initial, cfg, cfg.seed);
  parallel_for(cfg.runs, cfg.threads, [&](std::size_t r) {
    const std::uint64_t run_seed = cfg.seed + r;
    SplitSpec spec = cfg.split;
    spec.seed = run_seed;
    auto split = make_split(g.node_count(), labels, spec);
    if (shared) {
      report.per_run[r] = evaluate_split(*shared, labels, split, cfg.sgc);
    } else {
      report.per_run[r] = evaluate_split(prepare_features(g, initial, cfg, run_seed), labels, split, cfg.sgc);
    }
  });
  finish_report(report);
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

MetricsReport run_node_classification(const Graph& g, const LabelSet& labels, const ExperimentConfig& cfg,
                                      const FeatureMatrix* real_features) {
  cfg.validate();
  auto start = std::chrono::steady_clock::now();
  auto init = compute_initializer(g, cfg, real_features, cfg.seed);
  MetricsReport report;
  if (!init.features) {
    report.computed = false;
    report.warnings = std::move(init.warnings);
    return report;
  }
  report = run_node_classification_from_features(g, labels, *init.features, cfg);
  report.warnings.insert(report.warnings.begin(), init.warnings.begin(), init.warnings.end());
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

Eigen::VectorXd mean_pool(const FeatureMatrix& x) {
  if (x.rows() == 0) throw Error("mean_pool: no rows");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(x.dim()));
  for (std::size_t r = 0; r < x.rows(); ++r) sum += x.values().row(static_cast<Eigen::Index>(r)).transpose();
  return sum / static_cast<double>(x.rows());
}

FeatureMatrix graph_embeddings(const GraphCollection& coll, const ExperimentConfig& cfg,
                               std::vector<std::string>* warnings) {
  cfg.validate();
  coll.validate();
  if (coll.size() == 0) throw Error("graph collection is empty");
  if (cfg.shuffle) throw Error("feature shuffling applies to node classification only");
  if (cfg.initializer == Initializer::real && !coll.node_features)
    throw Error("initializer 'real' needs node labels in the collection");

  std::vector<Eigen::VectorXd> pooled(coll.size());
  std::vector<std::vector<std::string>> notes(coll.size());
  parallel_for(coll.size(), cfg.threads, [&](std::size_t i) {
    const Graph& g = coll.graphs[i];
    if (g.node_count() == 0) throw Error("graph " + std::to_string(i) + " has no nodes");
    const FeatureMatrix* real = coll.node_features ? &(*coll.node_features)[i] : nullptr;
    ExperimentConfig local = cfg;
    local.walk.threads = 1;
    auto init = compute_initializer(g, local, real, derive_seed(cfg.seed, 0x6772617068ull, i));
    if (!init.features) throw Error("initializer skipped on graph " + std::to_string(i));
    FeatureMatrix x = cfg.gnn == GnnKind::sgc ? propagate(g, *init.features, cfg.sgc.hops) : *init.features;
    pooled[i] = mean_pool(x);
    notes[i] = std::move(init.warnings);
  });

  FeatureMatrix out(coll.size(), static_cast<std::size_t>(pooled.front().size()));
  for (std::size_t i = 0; i < coll.size(); ++i) {
    if (static_cast<std::size_t>(pooled[i].size()) != out.dim()) throw Error("pooled embedding widths differ");
    out.values().row(static_cast<Eigen::Index>(i)) = pooled[i].transpose();
  }
  if (warnings) {
    std::map<std::string, std::size_t> counts;
    for (const auto& n : notes)
      for (const auto& w : n) ++counts[w];
    for (const auto& [w, c] : counts) warnings->push_back(w + (c > 1 ? " (" + std::to_string(c) + " graphs)" : ""));
  }
  return out;
}

MetricsReport run_graph_classification(const GraphCollection& coll, const ExperimentConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  MetricsReport report;
  FeatureMatrix x = standardize(graph_embeddings(coll, cfg, &report.warnings));
  LabelSet labels = LabelSet::single(coll.num_classes, coll.graph_labels);
  report.per_run.resize(cfg.runs);
  parallel_for(cfg.runs, cfg.threads, [&](std::size_t r) {
    SplitSpec spec = cfg.split;
    spec.seed = cfg.seed + r;
    auto split = make_split(coll.size(), labels, spec);
    report.per_run[r] = evaluate_split(x, labels, split, cfg.sgc);
  });
  finish_report(report);
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string results_csv(std::span<const ResultRow> rows) {
  std::string out = "dataset,initializer,gnn,shuffle,micro_mean,micro_std,macro_mean,macro_std,runs,wall_time_s\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out += row.dataset + ',' + std::string(to_string(row.initializer)) + ',' + std::string(to_string(row.gnn)) + ',' +
           (row.shuffle ? "yes" : "no") + ',';
    if (r.computed) {
      out += format_fixed(r.micro.mean, 6) + ',' + format_fixed(r.micro.std, 6) + ',' + format_fixed(r.macro.mean, 6) +
             ',' + format_fixed(r.macro.std, 6) + ',';
    } else {
      out += "NA,NA,NA,NA,";
    }
    out += std::to_string(r.per_run.size()) + ',' + format_fixed(r.wall_time_s, 3) + '\n';
  }
  return out;
}

std::string results_markdown(std::span<const ResultRow> rows, bool include_macro) {
  std::vector<std::string> datasets;
  struct Key {
    GnnKind gnn;
    bool shuffle;
    Initializer init;
    bool operator==(const Key&) const = default;
  };
  std::vector<Key> keys;
  for (const auto& row : rows) {
    if (std::find(datasets.begin(), datasets.end(), row.dataset) == datasets.end()) datasets.push_back(row.dataset);
    Key k{row.gnn, row.shuffle, row.initializer};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  auto cell = [](const MeanStd& m) { return format_fixed(m.mean, 3) + "±" + format_fixed(m.std, 3); };

  std::string out = "| GNN | Shuffle | Initializer |";
  std::string rule = "|---|---|---|";
  for (const auto& d : datasets) {
    if (include_macro) {
      out += ' ' + d + " Micro-F1 | " + d + " Macro-F1 |";
      rule += "---|---|";
    } else {
      out += ' ' + d + " |";
      rule += "---|";
    }
  }
  out += '\n' + rule + '\n';
  for (const auto& k : keys) {
    out += "| " + std::string(k.gnn == GnnKind::sgc ? "SGC" : "None") + " | " + (k.shuffle ? "Yes" : "No") + " | " +
           std::string(display_name(k.init)) + " |";
    for (const auto& d : datasets) {
      auto it = std::find_if(rows.begin(), rows.end(), [&](const ResultRow& r) {
        return r.dataset == d && Key{r.gnn, r.shuffle, r.initializer} == k;
      });
      bool have = it != rows.end() && it->report.computed;
      out += ' ' + (have ? cell(it->report.micro) : std::string("N/A")) + " |";
      if (include_macro) out += ' ' + (have ? cell(it->report.macro) : std::string("N/A")) + " |";
    }
    out += '\n';
  }
  return out;
}

}  // namespace featforge
