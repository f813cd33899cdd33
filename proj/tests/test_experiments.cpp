#include "featforge/experiments.hpp"
#include "featforge/oracles.hpp"
#include "featforge/rng.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace featforge;
using namespace testing_support;

namespace {

LabelSet labels_from(const std::vector<ClassId>& y, std::size_t classes) { return LabelSet::single(classes, y); }

std::vector<ClassId> block_labels(std::size_t n0, std::size_t n1) {
  std::vector<ClassId> y(n0, 0);
  y.insert(y.end(), n1, 1);
  return y;
}

std::size_t count_class(const std::vector<std::size_t>& idx, const std::vector<ClassId>& y, ClassId c) {
  return static_cast<std::size_t>(std::count_if(idx.begin(), idx.end(), [&](std::size_t i) { return y[i] == c; }));
}

void expect_partition(const Split& s, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto* part : {&s.train, &s.val, &s.test})
    for (auto i : *part) ++seen[i];
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(seen[i], 1) << i;
}

/// Two communities with labels equal to the community and one noisy feature.
struct Planted {
  Graph g;
  LabelSet labels;
  FeatureMatrix x;
};

Planted planted(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution in(0.2), out(0.02);
  std::normal_distribution<double> noise;
  std::vector<std::pair<NodeId, NodeId>> e;
  std::vector<ClassId> y(n);
  for (NodeId i = 0; i < n; ++i) y[i] = static_cast<ClassId>(i % 2);
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (y[i] == y[j] ? in(rng) : out(rng)) e.emplace_back(i, j);
  FeatureMatrix x(n, 2);
  for (NodeId i = 0; i < n; ++i) {
    x(i, 0) = y[i] + noise(rng);
    x(i, 1) = noise(rng);
  }
  return {Graph::from_edges(n, e), labels_from(y, 2), x};
}

GraphCollection triangles_and_paths() {
  GraphCollection c;
  for (int i = 0; i < 20; ++i) {
    c.graphs.push_back(complete_graph(3));
    c.graph_labels.push_back(0);
  }
  for (int i = 0; i < 20; ++i) {
    c.graphs.push_back(path_graph(4));
    c.graph_labels.push_back(1);
  }
  c.num_classes = 2;
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Splits

TEST(Split, HalfAndHalf) {
  auto y = block_labels(5, 5);
  SplitSpec spec;
  spec.train_fraction = 0.5;
  for (bool stratified : {true, false}) {
    spec.stratified = stratified;
    auto s = make_split(10, labels_from(y, 2), spec);
    EXPECT_EQ(s.train.size(), 5u);
    EXPECT_EQ(s.test.size(), 5u);
    EXPECT_TRUE(s.val.empty());
    expect_partition(s, 10);
  }
}

TEST(Split, SameSeedSameSplit) {
  auto y = block_labels(30, 20);
  SplitSpec spec;
  spec.seed = 5;
  spec.val_fraction = 0.2;
  auto a = make_split(50, labels_from(y, 2), spec);
  auto b = make_split(50, labels_from(y, 2), spec);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.test, b.test);
  spec.seed = 6;
  EXPECT_NE(make_split(50, labels_from(y, 2), spec).train, a.train);
}

TEST(Split, StratifiedKeepsProportions) {
  auto y = block_labels(70, 30);
  SplitSpec spec;
  spec.train_fraction = 0.1;
  auto s = make_split(100, labels_from(y, 2), spec);
  // Counting oracle over the label histogram: round(70 * 0.1), round(30 * 0.1).
  EXPECT_EQ(count_class(s.train, y, 0), 7u);
  EXPECT_EQ(count_class(s.train, y, 1), 3u);
  expect_partition(s, 100);
}

TEST(Split, PerClassCount) {
  auto y = block_labels(70, 30);
  SplitSpec spec;
  spec.per_class_train = 20;
  auto s = make_split(100, labels_from(y, 2), spec);
  EXPECT_EQ(count_class(s.train, y, 0), 20u);
  EXPECT_EQ(count_class(s.train, y, 1), 20u);
}

TEST(Split, ValidationFraction) {
  auto y = block_labels(50, 50);
  SplitSpec spec;
  spec.train_fraction = 0.2;
  spec.val_fraction = 0.3;
  auto s = make_split(100, labels_from(y, 2), spec);
  EXPECT_EQ(s.train.size(), 20u);
  EXPECT_EQ(s.val.size(), 30u);
  EXPECT_EQ(s.test.size(), 50u);
  expect_partition(s, 100);
}

TEST(Split, Errors) {
  std::vector<ClassId> y{0, 0, 2};
  SplitSpec spec;
  EXPECT_THROW(make_split(3, labels_from(y, 3), spec), Error);  // class 1 has no nodes
  spec.train_fraction = 0.7;
  spec.val_fraction = 0.3;
  EXPECT_THROW(spec.validate(), Error);
}

TEST(Split, MultiLabelStratifiesBySmallestClass) {
  LabelSet l(LabelMode::multi, 3, {{0, 2}, {1}, {0}, {1, 2}, {0}, {1}});
  SplitSpec spec;
  spec.train_fraction = 0.34;
  auto s = make_split(6, l, spec);
  expect_partition(s, 6);
  EXPECT_EQ(s.train.size(), 2u);
}

// ---------------------------------------------------------------------------
// Shuffling

TEST(Shuffle, IdentityPermutationLeavesRows) {
  std::uint64_t seed = 0;
  while (true) {
    auto p = shuffle_permutation(3, seed);
    if (p == std::vector<std::size_t>{0, 1, 2}) break;
    ++seed;
  }
  FeatureMatrix x(3, 2);
  for (std::size_t i = 0; i < 3; ++i) x(i, 0) = static_cast<double>(i);
  EXPECT_EQ(shuffle_feature_rows(x, seed), x);
}

TEST(Shuffle, PreservesRowMultiset) {
  FeatureMatrix x(40, 3);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  for (auto& v : x.values().reshaped()) v = d(rng);
  auto rows = [](const FeatureMatrix& m) {
    std::multiset<std::vector<double>> out;
    for (std::size_t i = 0; i < m.rows(); ++i) out.insert({m(i, 0), m(i, 1), m(i, 2)});
    return out;
  };
  for (std::uint64_t seed = 0; seed < 10; ++seed) EXPECT_EQ(rows(shuffle_feature_rows(x, seed)), rows(x));
}

TEST(Shuffle, MatchesReferenceFisherYates) {
  const std::uint64_t seed = 1234;
  // Reference: shuffle a list of rows directly.
  std::vector<int> rows{0, 1, 2, 3, 4};
  Rng rng = make_rng(seed, stream::shuffle);
  for (int i = 4; i >= 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, static_cast<std::size_t>(i));
    std::swap(rows[static_cast<std::size_t>(i)], rows[pick(rng)]);
  }
  FeatureMatrix x(5, 1);
  for (std::size_t i = 0; i < 5; ++i) x(i, 0) = 10.0 * static_cast<double>(i);
  auto out = shuffle_feature_rows(x, seed);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(out(i, 0), 10.0 * rows[i]);
}

// ---------------------------------------------------------------------------
// Metrics

TEST(Metrics, PerfectPredictions) {
  auto t = labels_from({0, 1, 2, 1}, 3);
  EXPECT_EQ(micro_f1(t, t), 1.0);
  EXPECT_EQ(macro_f1(t, t), 1.0);
}

TEST(Metrics, SingleLabelHandCounts) {
  auto truth = labels_from({0, 0, 1}, 2);
  auto pred = labels_from({0, 1, 1}, 2);
  EXPECT_NEAR(micro_f1(pred, truth), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(macro_f1(pred, truth), 2.0 / 3.0, 1e-15);
}

TEST(Metrics, MultiLabelHandCounts) {
  LabelSet truth(LabelMode::multi, 2, {{0}, {0, 1}});
  LabelSet pred(LabelMode::multi, 2, {{0, 1}, {1}});
  EXPECT_NEAR(micro_f1(pred, truth), 2.0 / 3.0, 1e-15);
}

TEST(Metrics, AbsentClassCountsZero) {
  auto t = labels_from({0, 1, 0}, 3);
  EXPECT_NEAR(macro_f1(t, t), 2.0 / 3.0, 1e-15);
}

TEST(Metrics, ModeMismatchThrows) {
  LabelSet m(LabelMode::multi, 2, {{0}, {1}});
  auto s = labels_from({0, 1}, 2);
  EXPECT_THROW(micro_f1(m, s), Error);
  EXPECT_THROW(macro_f1(s, m), Error);
}

TEST(Metrics, MicroEqualsAccuracyAndStaysInRange) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<ClassId> c(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ClassId> a(50), b(50);
    for (auto& v : a) v = c(rng);
    for (auto& v : b) v = c(rng);
    double acc = 0;
    for (int i = 0; i < 50; ++i) acc += a[i] == b[i];
    acc /= 50;
    double micro = micro_f1(labels_from(a, 4), labels_from(b, 4));
    double macro = macro_f1(labels_from(a, 4), labels_from(b, 4));
    EXPECT_NEAR(micro, acc, 1e-12);
    EXPECT_GE(macro, 0.0);
    EXPECT_LE(macro, 1.0);
  }
}

TEST(Aggregate, HandValues) {
  std::vector<MetricPair> one{{0.5, 0.5}};
  auto a = aggregate_runs(one);
  EXPECT_EQ(a.micro.mean, 0.5);
  EXPECT_EQ(a.micro.std, 0.0);
  std::vector<MetricPair> two{{0.4, 0.3}, {0.6, 0.3}};
  auto b = aggregate_runs(two);
  EXPECT_NEAR(b.micro.mean, 0.5, 1e-15);
  EXPECT_NEAR(b.micro.std, 0.1, 1e-15);
  EXPECT_EQ(b.macro.std, 0.0);
  EXPECT_THROW(aggregate_runs(std::vector<MetricPair>{}), Error);
}

TEST(MeanPool, Values) {
  FeatureMatrix a(3, 2);
  a.values().setConstant(2.5);
  EXPECT_EQ(mean_pool(a), Eigen::Vector2d(2.5, 2.5));
  FeatureMatrix b(2, 2);
  b(0, 0) = 1;
  b(0, 1) = 3;
  b(1, 0) = 3;
  b(1, 1) = 5;
  EXPECT_EQ(mean_pool(b), Eigen::Vector2d(2, 4));
  EXPECT_THROW(mean_pool(FeatureMatrix(0, 2)), Error);

  FeatureMatrix r(7, 4);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> d;
  for (auto& v : r.values().reshaped()) v = d(rng);
  auto pooled = mean_pool(r);
  for (std::size_t c = 0; c < 4; ++c) {
    double sum = 0;
    for (std::size_t i = 0; i < 7; ++i) sum += r(i, c);
    EXPECT_NEAR(pooled[static_cast<Eigen::Index>(c)], sum / 7, 1e-12);
  }
}

// ---------------------------------------------------------------------------
// Pipelines

TEST(NodePipeline, SingleRunHasZeroStd) {
  auto p = planted(60, 1);
  ExperimentConfig cfg;
  cfg.runs = 1;
  cfg.initializer = Initializer::real;
  auto r = run_node_classification(p.g, p.labels, cfg, &p.x);
  EXPECT_EQ(r.micro.std, 0.0);
  EXPECT_EQ(r.per_run.size(), 1u);
}

TEST(NodePipeline, ReportConsistentWithRuns) {
  auto p = planted(80, 2);
  ExperimentConfig cfg;
  cfg.runs = 5;
  cfg.initializer = Initializer::degree;
  auto r = run_node_classification(p.g, p.labels, cfg);
  auto agg = aggregate_runs(r.per_run);
  EXPECT_NEAR(r.micro.mean, agg.micro.mean, 1e-12);
  EXPECT_NEAR(r.micro.std, agg.micro.std, 1e-12);
  EXPECT_NEAR(r.macro.mean, agg.macro.mean, 1e-12);
  for (const auto& m : r.per_run) {
    EXPECT_GE(m.micro, 0.0);
    EXPECT_LE(m.micro, 1.0);
  }
}

TEST(NodePipeline, IdentityShuffleEqualsNoShuffle) {
  // Four nodes, so an identity permutation turns up within a few seeds.
  Graph g = make_graph(4, {{0, 1}, {2, 3}, {1, 2}});
  LabelSet y = labels_from({0, 0, 1, 1}, 2);
  FeatureMatrix x(4, 1);
  for (std::size_t i = 0; i < 4; ++i) x(i, 0) = static_cast<double>(i);
  std::uint64_t seed = 0;
  while (shuffle_permutation(4, seed) != std::vector<std::size_t>{0, 1, 2, 3}) ++seed;
  ExperimentConfig cfg;
  cfg.runs = 1;
  cfg.seed = seed;
  cfg.split.train_fraction = 0.5;
  cfg.initializer = Initializer::real;
  auto plain = run_node_classification(g, y, cfg, &x);
  cfg.shuffle = true;
  auto shuffled = run_node_classification(g, y, cfg, &x);
  EXPECT_EQ(plain.per_run[0].micro, shuffled.per_run[0].micro);
  EXPECT_EQ(plain.per_run[0].macro, shuffled.per_run[0].macro);
}

TEST(NodePipeline, NoGnnEqualsDirectClassification) {
  auto p = planted(60, 3);
  ExperimentConfig cfg;
  cfg.runs = 3;
  cfg.gnn = GnnKind::none;
  cfg.initializer = Initializer::real;
  cfg.sgc.hops = 7;  // irrelevant without propagation
  auto r = run_node_classification(p.g, p.labels, cfg, &p.x);
  for (std::size_t run = 0; run < cfg.runs; ++run) {
    SplitSpec spec = cfg.split;
    spec.seed = cfg.seed + run;
    auto split = make_split(60, p.labels, spec);
    FeatureMatrix z = standardize(p.x);
    FeatureMatrix train(split.train.size(), 2), test(split.test.size(), 2);
    for (std::size_t i = 0; i < split.train.size(); ++i)
      train.values().row(static_cast<Eigen::Index>(i)) = z.values().row(static_cast<Eigen::Index>(split.train[i]));
    for (std::size_t i = 0; i < split.test.size(); ++i)
      test.values().row(static_cast<Eigen::Index>(i)) = z.values().row(static_cast<Eigen::Index>(split.test[i]));
    auto model = fit_classifier(train, p.labels.subset(split.train), cfg.sgc);
    auto pred = predict(model, test);
    EXPECT_EQ(r.per_run[run].micro, micro_f1(pred, p.labels.subset(split.test)));
  }
}

TEST(NodePipeline, DeterministicAndThreadIndependent) {
  auto p = planted(60, 4);
  ExperimentConfig cfg;
  cfg.runs = 4;
  cfg.initializer = Initializer::real;
  cfg.shuffle = true;
  auto a = run_node_classification(p.g, p.labels, cfg, &p.x);
  auto b = run_node_classification(p.g, p.labels, cfg, &p.x);
  cfg.threads = 3;
  auto c = run_node_classification(p.g, p.labels, cfg, &p.x);
  for (std::size_t r = 0; r < 4; ++r) {
    EXPECT_EQ(a.per_run[r].micro, b.per_run[r].micro);
    EXPECT_EQ(a.per_run[r].micro, c.per_run[r].micro);
    EXPECT_EQ(a.per_run[r].macro, c.per_run[r].macro);
  }
}

TEST(NodePipeline, RealFeaturesBeatShuffledOnPlantedData) {
  auto p = planted(200, 5);
  p.x.values().col(0) = p.x.values().col(0) * 0.3;  // strong label signal in the features
  ExperimentConfig cfg;
  cfg.runs = 3;
  cfg.gnn = GnnKind::none;
  cfg.initializer = Initializer::real;
  auto plain = run_node_classification(p.g, p.labels, cfg, &p.x);
  cfg.shuffle = true;
  auto shuffled = run_node_classification(p.g, p.labels, cfg, &p.x);
  EXPECT_GT(plain.micro.mean, shuffled.micro.mean);
}

TEST(NodePipeline, MultiLabelUsesOneVsRest) {
  auto p = planted(80, 6);
  std::vector<std::vector<ClassId>> sets;
  for (std::size_t i = 0; i < 80; ++i) {
    std::vector<ClassId> s{p.labels.label(i)};
    if (i % 5 == 0) s.push_back(2);
    sets.push_back(s);
  }
  LabelSet multi(LabelMode::multi, 3, sets);
  ExperimentConfig cfg;
  cfg.runs = 2;
  cfg.split.train_fraction = 0.5;
  cfg.initializer = Initializer::real;
  auto r = run_node_classification(p.g, multi, cfg, &p.x);
  EXPECT_GT(r.micro.mean, 0.0);
  EXPECT_LE(r.micro.mean, 1.0);
}

TEST(NodePipeline, RealWithoutFeaturesThrows) {
  auto p = planted(20, 7);
  ExperimentConfig cfg;
  cfg.initializer = Initializer::real;
  EXPECT_THROW(run_node_classification(p.g, p.labels, cfg), Error);
}

TEST(NodePipeline, EdgeCapMarksNotComputed) {
  auto p = planted(40, 8);
  ExperimentConfig cfg;
  cfg.initializer = Initializer::triangles;
  cfg.local_count_edge_cap = 1;
  auto r = run_node_classification(p.g, p.labels, cfg);
  EXPECT_FALSE(r.computed);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(GraphPipeline, TrianglesVersusPaths) {
  auto coll = triangles_and_paths();
  ExperimentConfig cfg;
  cfg.initializer = Initializer::degree;
  cfg.split.train_fraction = 0.5;
  for (GnnKind gnn : {GnnKind::none, GnnKind::sgc}) {
    cfg.gnn = gnn;
    auto x = graph_embeddings(coll, cfg);
    EXPECT_EQ(x.rows(), 40u);
    if (gnn == GnnKind::none) {
      EXPECT_DOUBLE_EQ(x(0, 0), 2.0);
      EXPECT_DOUBLE_EQ(x(39, 0), 1.5);
    }
    auto r = run_graph_classification(coll, cfg);
    EXPECT_EQ(r.micro.mean, 1.0) << to_string(gnn);
  }
}

TEST(GraphPipeline, HopeOnTinyGraphsIsPadded) {
  auto coll = triangles_and_paths();
  coll.graphs.push_back(make_graph(2, {}));
  coll.graph_labels.push_back(0);
  ExperimentConfig cfg;
  cfg.initializer = Initializer::hope;
  cfg.hope.dim = 8;
  std::vector<std::string> warnings;
  auto x = graph_embeddings(coll, cfg, &warnings);
  EXPECT_EQ(x.dim(), 8u);
  EXPECT_FALSE(warnings.empty());
}

TEST(GraphPipeline, ShuffleIsRejected) {
  ExperimentConfig cfg;
  cfg.shuffle = true;
  EXPECT_THROW(graph_embeddings(triangles_and_paths(), cfg), Error);
}

TEST(Names, RoundTrip) {
  for (auto init : {Initializer::degree, Initializer::pagerank, Initializer::triangles, Initializer::egonet,
                    Initializer::kcore, Initializer::coloring, Initializer::clique, Initializer::real,
                    Initializer::deepwalk, Initializer::hope})
    EXPECT_EQ(parse_initializer(to_string(init)), init);
  EXPECT_EQ(parse_gnn("none"), GnnKind::none);
  EXPECT_THROW(parse_initializer("node2vec"), Error);
  EXPECT_THROW(parse_gnn("gcn"), Error);
  EXPECT_EQ(display_name(Initializer::kcore), "k-core no.");
}

TEST(Reports, CsvAndMarkdown) {
  MetricsReport done;
  done.per_run = {{0.7, 0.6}, {0.8, 0.6}};
  done.micro = {0.75, 0.05};
  done.macro = {0.6, 0.0};
  done.wall_time_s = 1.5;
  MetricsReport skipped;
  skipped.computed = false;
  std::vector<ResultRow> rows{{"cora", Initializer::real, GnnKind::sgc, false, done},
                              {"cora", Initializer::triangles, GnnKind::sgc, true, skipped}};
  EXPECT_EQ(results_csv(rows),
            "dataset,initializer,gnn,shuffle,micro_mean,micro_std,macro_mean,macro_std,runs,wall_time_s\n"
            "cora,real,sgc,no,0.750000,0.050000,0.600000,0.000000,2,1.500\n"
            "cora,triangles,sgc,yes,NA,NA,NA,NA,0,0.000\n");
  auto md = results_markdown(rows, true);
  EXPECT_NE(md.find("| SGC | No | real features | 0.750±0.050 | 0.600±0.000 |"), std::string::npos) << md;
  EXPECT_NE(md.find("| SGC | Yes | #triangles | N/A | N/A |"), std::string::npos) << md;
}
