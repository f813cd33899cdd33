#include "featforge/cli.hpp"

#include "featforge/centrality.hpp"
#include "featforge/experiments.hpp"
#include "featforge/io.hpp"
#include "featforge/manifest.hpp"
#include "featforge/oracles.hpp"
#include "featforge/sgc.hpp"
#include "featforge/spectral_embed.hpp"
#include "featforge/walk_embed.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace featforge {
namespace {

using Clock = std::chrono::steady_clock;

struct CommonOptions {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool no_timings = false;
  std::string config;
  std::string out;
};

struct NodeInputs {
  std::string graph;
  std::string labels;
  std::string features;
  bool multi_label = false;
};

struct Options {
  CommonOptions common;
  NodeInputs node;
  std::string collection_dir;
  std::string dataset;
  std::string method;
  std::string init;
  std::string gnn = "sgc";
  bool shuffle = false;
  bool macro = false;
  std::size_t oracle_graphs = 200;
  std::size_t spectral_graphs = 20;
  std::size_t propagation_graphs = 50;
  ExperimentConfig exp;
  std::size_t per_class = 20;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  if (out.empty()) throw Error("empty list '" + s + "'");
  return out;
}

/// Finds `p` as given, or under $FEATFORGE_DATA_DIR when relative.
fs::path resolve_input(const std::string& p) {
  fs::path path(p);
  if (fs::exists(path)) return path;
  if (path.is_relative()) {
    if (const char* root = std::getenv("FEATFORGE_DATA_DIR"); root && *root) {
      fs::path alt = fs::path(root) / path;
      if (fs::exists(alt)) return alt;
    }
  }
  throw Error("no such file: " + p);
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

/// Turns a flat JSON object into `--key value` tokens.
std::vector<std::string> config_tokens(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw Error("config " + path.string() + ": expected a JSON object");
  std::vector<std::string> tokens;
  for (const auto& [key, value] : j.items()) {
    if (key == "config") throw Error("config files cannot nest --config");
    std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ',';
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      tokens.push_back(flag);
      tokens.push_back(joined);
    } else if (value.is_string()) {
      tokens.push_back(flag);
      tokens.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      tokens.push_back(flag);
      tokens.push_back(value.dump());
    } else {
      throw Error("config key '" + key + "' has an unsupported value");
    }
  }
  return tokens;
}

/// Resolved option values of a subcommand, for the manifest.
nlohmann::json option_snapshot(const CLI::App& sub) {
  nlohmann::json j = nlohmann::json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    if (opt->get_items_expected_max() == 0) {
      j[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      j[name] = opt->results().back();
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

class RunRecorder {
 public:
  RunRecorder(std::string command, const CommonOptions& common) : common_(common) { manifest_.command = std::move(command); }

  void input(const fs::path& p) { manifest_.inputs.push_back({p.string(), digest_path(p)}); }
  void output(const fs::path& p) { manifest_.outputs.push_back(p.string()); }
  void config(nlohmann::json j) { manifest_.config = std::move(j); }
  void seeds(nlohmann::json j) { manifest_.seeds = std::move(j); }

  template <typename F>
  auto stage(const std::string& name, F&& body) {
    auto start = Clock::now();
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      record(name, start);
    } else {
      auto result = body();
      record(name, start);
      return result;
    }
  }

  void write(const fs::path& path) {
    output(path);
    write_manifest(path, manifest_);
  }

 private:
  void record(const std::string& name, Clock::time_point start) {
    if (common_.no_timings) return;
    manifest_.timings.push_back({name, std::chrono::duration<double>(Clock::now() - start).count()});
  }

  const CommonOptions& common_;
  RunManifest manifest_;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

fs::path with_suffix(const std::string& base, const std::string& suffix) { return fs::path(base + suffix); }

// ---------------------------------------------------------------------------
// Option groups

void add_common(CLI::App* sub, Options& o, bool out_required) {
  sub->add_option("--config", o.common.config, "JSON file of flag values; explicit flags win");
  sub->add_option("--seed", o.common.seed, "Seed for every random stream")->capture_default_str();
  sub->add_option("--threads", o.common.threads, "Worker threads; 1 is the deterministic path")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_flag("--no-timings", o.common.no_timings, "Leave wall-clock times out of every output");
  auto* out = sub->add_option("--out", o.common.out, "Output path (prefix for reports)");
  if (out_required) out->required();
}

void add_centrality(CLI::App* sub, CentralityConfig& c) {
  sub->add_option("--damping", c.pagerank_damping, "PageRank damping")->capture_default_str();
  sub->add_option("--pagerank-tol", c.pagerank_tol, "PageRank L1 tolerance")->capture_default_str();
  sub->add_option("--pagerank-max-iter", c.pagerank_max_iter, "PageRank iteration cap")->capture_default_str();
  sub->add_option("--clique-cap", c.clique_node_cap, "Exact clique search up to this many nodes")
      ->capture_default_str();
}

void add_embedding(CLI::App* sub, Options& o) {
  auto& w = o.exp.walk;
  auto& h = o.exp.hope;
  sub->add_option("--dim", w.dim, "Embedding dimension")->capture_default_str();
  sub->add_option("--walks-per-node", w.walks_per_node)->capture_default_str();
  sub->add_option("--walk-length", w.walk_length)->capture_default_str();
  sub->add_option("--window", w.window)->capture_default_str();
  sub->add_option("--negatives", w.negatives)->capture_default_str();
  sub->add_option("--walk-epochs", w.epochs)->capture_default_str();
  sub->add_option("--walk-lr", w.initial_lr)->capture_default_str();
  sub->add_option("--hope-decay", h.decay_factor, "beta = decay / spectral radius")->capture_default_str();
  sub->add_option("--svd-oversampling", h.svd_oversampling)->capture_default_str();
  sub->add_option("--svd-power-steps", h.svd_power_steps)->capture_default_str();
}

void add_training(CLI::App* sub, Options& o, double default_train) {
  auto& s = o.exp.sgc;
  o.exp.split.train_fraction = default_train;
  sub->add_option("--init", o.init, "Comma list of initializers");
  sub->add_option("--gnn", o.gnn, "Comma list of sgc, none")->capture_default_str();
  sub->add_option("--runs", o.exp.runs)->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--train-fraction", o.exp.split.train_fraction)->capture_default_str();
  sub->add_option("--val-fraction", o.exp.split.val_fraction)->capture_default_str();
  sub->add_option("--hops", s.hops, "SGC propagation steps")->capture_default_str();
  sub->add_option("--l2", s.l2_weight)->capture_default_str();
  sub->add_option("--clf-lr", s.learning_rate)->capture_default_str();
  sub->add_option("--max-epochs", s.max_epochs)->capture_default_str();
  sub->add_option("--clf-tol", s.convergence_tol)->capture_default_str();
  sub->add_option("--local-count-edge-cap", o.exp.local_count_edge_cap,
                  "Skip triangles/egonet above this many edges (0: no cap)")
      ->capture_default_str();
  sub->add_option("--dataset", o.dataset, "Dataset name used in reports");
  sub->add_flag("--macro", o.macro, "Add Macro-F1 columns to the Markdown table");
  add_centrality(sub, o.exp.centrality);
  add_embedding(sub, o);
}

void add_node_inputs(CLI::App* sub, Options& o) {
  sub->add_option("--graph", o.node.graph, "Edge list")->required();
  sub->add_option("--labels", o.node.labels, "Node labels")->required();
  sub->add_option("--features", o.node.features, "Headerless CSV of node features");
  sub->add_flag("--multi-label", o.node.multi_label, "Labels are comma-separated class sets");
  sub->add_option("--per-class", o.per_class, "Training nodes per class when --features is given")
      ->capture_default_str();
}

/// Shared experiment settings from the common flags. The subcommands share one
/// Options object, so per-subcommand defaults are re-applied here.
void finalize_experiment(const CLI::App& sub, Options& o, double default_train = 0.1) {
  if (sub.get_option_no_throw("--train-fraction") && sub.count("--train-fraction") == 0)
    o.exp.split.train_fraction = default_train;
  o.exp.seed = o.common.seed;
  o.exp.threads = o.common.threads;
  o.exp.walk.threads = o.common.threads;
  o.exp.hope.dim = o.exp.walk.dim;
}

nlohmann::json run_seeds(const Options& o) {
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t r = 0; r < o.exp.runs; ++r) runs.push_back(o.common.seed + r);
  return {{"seed", o.common.seed}, {"initializer_seed", o.common.seed}, {"run_seeds", runs}};
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_features(const CLI::App& sub, Options& o, const std::string& command, std::ostream& out) {
  RunRecorder rec(command, o.common);
  rec.config(option_snapshot(sub));
  rec.seeds({{"seed", o.common.seed}});
  fs::path graph_path = resolve_input(o.node.graph);
  rec.input(graph_path);
  auto loaded = rec.stage("load", [&] { return read_edge_list(graph_path); });

  ExperimentConfig cfg = o.exp;
  cfg.initializer = parse_initializer(o.method);
  if (cfg.initializer == Initializer::real || cfg.initializer == Initializer::deepwalk ||
      cfg.initializer == Initializer::hope)
    throw Error("features: unknown method '" + o.method + "' (use embed for deepwalk/hope)");
  auto init = rec.stage("features", [&] { return compute_initializer(loaded.graph, cfg, nullptr, cfg.seed); });
  for (const auto& w : init.warnings) out << "warning: " << w << '\n';
  if (!init.features) throw Error("features: " + o.method + " was not computed");

  fs::path out_path(o.common.out);
  rec.stage("write", [&] {
    write_text(out_path, format_feature_csv(to_output_order(*init.features, loaded.ids)));
    write_id_map(with_suffix(o.common.out, ".ids"), loaded.ids);
  });
  rec.output(out_path);
  rec.output(with_suffix(o.common.out, ".ids"));
  rec.write(with_suffix(o.common.out, ".manifest.json"));
  out << "wrote " << out_path.string() << '\n';
  return 0;
}

int cmd_embed(const CLI::App& sub, Options& o, const std::string& command, std::ostream& out) {
  finalize_experiment(sub, o);
  RunRecorder rec(command, o.common);
  rec.config(option_snapshot(sub));
  rec.seeds({{"seed", o.common.seed}});
  fs::path graph_path = resolve_input(o.node.graph);
  rec.input(graph_path);
  auto loaded = rec.stage("load", [&] { return read_edge_list(graph_path); });

  ExperimentConfig cfg = o.exp;
  cfg.initializer = parse_initializer(o.method);
  if (cfg.initializer != Initializer::deepwalk && cfg.initializer != Initializer::hope)
    throw Error("embed: method must be deepwalk or hope, got '" + o.method + "'");
  cfg.validate();
  auto init = rec.stage("embed", [&] { return compute_initializer(loaded.graph, cfg, nullptr, cfg.seed); });
  for (const auto& w : init.warnings) out << "warning: " << w << '\n';

  fs::path out_path(o.common.out);
  rec.stage("write", [&] {
    write_text(out_path, format_feature_csv(to_output_order(*init.features, loaded.ids)));
    write_id_map(with_suffix(o.common.out, ".ids"), loaded.ids);
  });
  rec.output(out_path);
  rec.output(with_suffix(o.common.out, ".ids"));
  rec.write(with_suffix(o.common.out, ".manifest.json"));
  out << "wrote " << out_path.string() << '\n';
  return 0;
}

struct LoadedNodeData {
  NodeDataset data;
  std::string name;
};

LoadedNodeData load_node_inputs(const CLI::App& sub, Options& o, RunRecorder& rec) {
  fs::path graph_path = resolve_input(o.node.graph);
  fs::path label_path = resolve_input(o.node.labels);
  std::optional<fs::path> feature_path;
  if (!o.node.features.empty()) feature_path = resolve_input(o.node.features);
  rec.input(graph_path);
  rec.input(label_path);
  if (feature_path) rec.input(*feature_path);

  // Attributed datasets default to a fixed number of training nodes per class.
  if (feature_path && sub.count("--train-fraction") == 0) o.exp.split.per_class_train = o.per_class;

  LoadedNodeData out;
  out.data = rec.stage("load", [&] {
    return load_node_dataset(graph_path, label_path, o.node.multi_label ? LabelMode::multi : LabelMode::single,
                             feature_path);
  });
  out.name = o.dataset.empty() ? graph_path.stem().string() : o.dataset;
  return out;
}

std::vector<Initializer> initializer_list(const Options& o) {
  std::string spec = o.init.empty() ? (o.node.features.empty() ? "degree" : "real") : o.init;
  std::vector<Initializer> out;
  for (const auto& name : split_list(spec)) out.push_back(parse_initializer(name));
  return out;
}

std::vector<GnnKind> gnn_list(const Options& o) {
  std::vector<GnnKind> out;
  for (const auto& name : split_list(o.gnn)) out.push_back(parse_gnn(name));
  return out;
}

void write_reports(const Options& o, std::vector<ResultRow>& rows, bool multi, RunRecorder& rec, std::ostream& out) {
  if (o.common.no_timings)
    for (auto& r : rows) r.report.wall_time_s = 0.0;
  std::string md = results_markdown(rows, o.macro || multi);
  rec.stage("write", [&] {
    write_text(with_suffix(o.common.out, ".csv"), results_csv(rows));
    write_text(with_suffix(o.common.out, ".md"), md);
  });
  rec.output(with_suffix(o.common.out, ".csv"));
  rec.output(with_suffix(o.common.out, ".md"));
  rec.write(with_suffix(o.common.out, ".manifest.json"));
  for (const auto& r : rows)
    for (const auto& w : r.report.warnings) out << "warning: " << w << '\n';
  out << md;
}

/// Runs every (initializer, gnn) pair, and with `paired_shuffle` both the
/// original and the shuffled features. Each initializer is computed once.
std::vector<ResultRow> node_rows(const LoadedNodeData& in, Options& o, RunRecorder& rec, bool paired_shuffle) {
  const auto& d = in.data;
  std::vector<ResultRow> rows;
  auto gnns = gnn_list(o);
  for (Initializer init : initializer_list(o)) {
    ExperimentConfig cfg = o.exp;
    cfg.initializer = init;
    cfg.validate();
    auto start = Clock::now();
    auto features = rec.stage("initializer:" + std::string(to_string(init)), [&] {
      return compute_initializer(d.graph, cfg, d.features ? &*d.features : nullptr, cfg.seed);
    });
    double init_time = std::chrono::duration<double>(Clock::now() - start).count();
    std::vector<bool> shuffles = paired_shuffle ? std::vector<bool>{false, true} : std::vector<bool>{o.shuffle};
    for (GnnKind gnn : gnns) {
      for (bool shuffle : shuffles) {
        ResultRow row{in.name, init, gnn, shuffle, {}};
        row.report.warnings = features.warnings;
        if (features.features) {
          cfg.gnn = gnn;
          cfg.shuffle = shuffle;
          std::string stage = "classify:" + std::string(to_string(init)) + ':' + std::string(to_string(gnn)) +
                              (shuffle ? ":shuffle" : "");
          auto report = rec.stage(stage, [&] {
            return run_node_classification_from_features(d.graph, d.labels, *features.features, cfg);
          });
          report.warnings.insert(report.warnings.begin(), features.warnings.begin(), features.warnings.end());
          report.wall_time_s += init_time;
          row.report = std::move(report);
        } else {
          row.report.computed = false;
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

int cmd_node_classify(const CLI::App& sub, Options& o, const std::string& command, std::ostream& out,
                      bool paired_shuffle) {
  finalize_experiment(sub, o);
  RunRecorder rec(command, o.common);
  auto in = load_node_inputs(sub, o, rec);
  nlohmann::json cfg = option_snapshot(sub);
  if (o.exp.split.per_class_train) cfg["per-class-split"] = *o.exp.split.per_class_train;
  rec.config(std::move(cfg));
  rec.seeds(run_seeds(o));
  auto rows = node_rows(in, o, rec, paired_shuffle);
  write_reports(o, rows, in.data.labels.mode() == LabelMode::multi, rec, out);
  return 0;
}

int cmd_graph_classify(const CLI::App& sub, Options& o, const std::string& command, std::ostream& out) {
  finalize_experiment(sub, o, 0.9);
  RunRecorder rec(command, o.common);
  rec.config(option_snapshot(sub));
  rec.seeds(run_seeds(o));
  fs::path dir = resolve_input(o.collection_dir);
  rec.input(dir);
  auto coll = rec.stage("load", [&] { return load_graph_collection(dir); });
  std::string name = o.dataset.empty() ? fs::absolute(dir).lexically_normal().filename().string() : o.dataset;
  if (name.empty()) name = fs::absolute(dir).parent_path().filename().string();

  std::vector<ResultRow> rows;
  std::string init_spec = o.init.empty() ? "degree" : o.init;
  for (const auto& init_name : split_list(init_spec)) {
    for (GnnKind gnn : gnn_list(o)) {
      ExperimentConfig cfg = o.exp;
      cfg.initializer = parse_initializer(init_name);
      cfg.gnn = gnn;
      auto report = rec.stage("classify:" + init_name + ':' + std::string(to_string(gnn)),
                              [&] { return run_graph_classification(coll, cfg); });
      rows.push_back({name, cfg.initializer, gnn, false, std::move(report)});
    }
  }
  write_reports(o, rows, false, rec, out);
  return 0;
}

int cmd_validate(const CLI::App& sub, Options& o, const std::string& command, std::ostream& out) {
  RunRecorder rec(command, o.common);
  rec.config(option_snapshot(sub));
  rec.seeds({{"seed", o.common.seed}});
  std::ostringstream log;
  bool ok = rec.stage("centrality", [&] { return oracle::run_centrality_suite(o.oracle_graphs, o.common.seed, log); });
  ok = rec.stage("spectral", [&] { return oracle::run_spectral_suite(o.spectral_graphs, o.common.seed, log); }) && ok;
  ok = rec.stage("propagation",
                 [&] { return oracle::run_propagation_suite(o.propagation_graphs, o.common.seed, log); }) &&
       ok;
  log << (ok ? "all oracle checks passed\n" : "oracle checks FAILED\n");
  out << log.str();
  if (!o.common.out.empty()) {
    write_text(o.common.out, log.str());
    rec.output(o.common.out);
    rec.write(with_suffix(o.common.out, ".manifest.json"));
  }
  if (!ok) throw Error("validate: implementation disagrees with the reference oracles");
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app("Structural node features, graph embeddings and SGC experiments", "featforge");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", kToolVersion);

  auto* features = app.add_subcommand("features", "Write centrality features of a graph as CSV");
  add_common(features, o, true);
  features->add_option("--graph", o.node.graph, "Edge list")->required();
  features->add_option("--method", o.method, "degree, pagerank, triangles, egonet, kcore, coloring or clique")
      ->required();
  add_centrality(features, o.exp.centrality);

  auto* embed = app.add_subcommand("embed", "Write DeepWalk or HOPE embeddings as CSV");
  add_common(embed, o, true);
  embed->add_option("--graph", o.node.graph, "Edge list")->required();
  embed->add_option("--method", o.method, "deepwalk or hope")->required();
  add_embedding(embed, o);

  auto* node = app.add_subcommand("node-classify", "Node classification with chosen initializers");
  add_common(node, o, true);
  add_node_inputs(node, o);
  add_training(node, o, 0.1);
  node->add_flag("--shuffle", o.shuffle, "Shuffle feature rows across nodes before training");

  auto* graph = app.add_subcommand("graph-classify", "Graph classification over a TU-format collection");
  add_common(graph, o, true);
  graph->add_option("--data", o.collection_dir, "Directory holding DS_A.txt and friends")->required();
  add_training(graph, o, 0.9);

  auto* study = app.add_subcommand("shuffle-study", "Paired runs with and without feature shuffling");
  add_common(study, o, true);
  add_node_inputs(study, o);
  add_training(study, o, 0.1);

  auto* validate = app.add_subcommand("validate", "Check the implementation against brute-force oracles");
  add_common(validate, o, false);
  validate->add_option("--graphs", o.oracle_graphs, "Random graphs for the centrality checks")->capture_default_str();
  validate->add_option("--spectral-graphs", o.spectral_graphs)->capture_default_str();
  validate->add_option("--propagation-graphs", o.propagation_graphs)->capture_default_str();

  std::string command = "featforge";
  for (const auto& a : args) command += ' ' + a;

  try {
    std::vector<std::string> tokens = args;
    // Config values go right after the subcommand name so later flags win.
    auto cfg_it = std::find_if(tokens.begin(), tokens.end(),
                               [](const std::string& t) { return t == "--config" || t.rfind("--config=", 0) == 0; });
    if (cfg_it != tokens.end() && !tokens.empty()) {
      std::string cfg_path;
      if (*cfg_it == "--config") {
        if (std::next(cfg_it) == tokens.end()) throw Error("--config needs a file");
        cfg_path = *std::next(cfg_it);
      } else {
        cfg_path = cfg_it->substr(9);
      }
      auto extra = config_tokens(resolve_input(cfg_path));
      tokens.insert(tokens.begin() + 1, extra.begin(), extra.end());
    }
    std::reverse(tokens.begin(), tokens.end());
    app.parse(tokens);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "featforge: " << one_line(e.what()) << '\n';
    return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
  } catch (const std::exception& e) {
    err << "featforge: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (*features) return cmd_features(*features, o, command, out);
    if (*embed) return cmd_embed(*embed, o, command, out);
    if (*node) return cmd_node_classify(*node, o, command, out, false);
    if (*graph) return cmd_graph_classify(*graph, o, command, out);
    if (*study) return cmd_node_classify(*study, o, command, out, true);
    if (*validate) return cmd_validate(*validate, o, command, out);
  } catch (const std::exception& e) {
    err << "featforge: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 1;
}

}  // namespace featforge
