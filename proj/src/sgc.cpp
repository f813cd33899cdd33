#include "featforge/sgc.hpp"

#include "featforge/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

namespace featforge {
namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

const char* mode_name(ClassifierMode m) { return m == ClassifierMode::softmax ? "softmax" : "one_vs_rest"; }

/// Generic full-batch descent with step rejection. `objective(params, grad)`
/// returns the loss and fills the gradient; params and grad share a layout.
template <typename Params, typename Objective>
Params descend(Params params, Objective&& objective, const SgcConfig& cfg, TrainingTrace* trace) {
  Params grad = params;
  double loss = objective(params, grad);
  if (trace) trace->losses.push_back(loss);
  double lr = cfg.learning_rate;
  Params candidate = params, candidate_grad = params;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    if (trace) ++trace->epochs;
    candidate.step_from(params, grad, lr);
    double next = objective(candidate, candidate_grad);
    if (!(next <= loss)) {
      if (trace) ++trace->rejected_steps;
      lr *= 0.5;
      if (lr < 1e-14) break;
      continue;
    }
    double improvement = loss - next;
    std::swap(params, candidate);
    std::swap(grad, candidate_grad);
    loss = next;
    if (trace) trace->losses.push_back(loss);
    if (improvement < cfg.convergence_tol) break;
  }
  return params;
}

struct SoftmaxParams {
  Matrix w;
  Vector b;
  void step_from(const SoftmaxParams& p, const SoftmaxParams& g, double lr) {
    w = p.w - lr * g.w;
    b = p.b - lr * g.b;
  }
};

struct LogisticParams {
  Vector w;
  double b = 0.0;
  void step_from(const LogisticParams& p, const LogisticParams& g, double lr) {
    w = p.w - lr * g.w;
    b = p.b - lr * g.b;
  }
};

}  // namespace

void SgcConfig::validate() const {
  if (l2_weight < 0.0) throw Error("sgc config: l2_weight must be non-negative");
  if (!(learning_rate > 0.0)) throw Error("sgc config: learning_rate must be positive");
  if (max_epochs == 0) throw Error("sgc config: max_epochs must be positive");
  if (!(convergence_tol > 0.0)) throw Error("sgc config: convergence_tol must be positive");
}

FeatureMatrix propagate(const Graph& g, const FeatureMatrix& x, std::size_t hops) {
  const std::size_t n = g.node_count();
  if (x.rows() != n)
    throw Error("propagate: feature rows (" + std::to_string(x.rows()) + ") != node count (" + std::to_string(n) + ")");
  std::vector<double> scale(n);
  for (NodeId v = 0; v < n; ++v) scale[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v) + 1));
  FeatureMatrix::Matrix cur = x.values();
  FeatureMatrix::Matrix next(cur.rows(), cur.cols());
  for (std::size_t hop = 0; hop < hops; ++hop) {
    for (NodeId v = 0; v < n; ++v) {
      auto row = next.row(v);
      row = scale[v] * cur.row(v);
      for (NodeId u : g.neighbors(v)) row += scale[u] * cur.row(u);
      row *= scale[v];
    }
    cur.swap(next);
  }
  return FeatureMatrix(std::move(cur));
}

FeatureMatrix standardize(const FeatureMatrix& x) {
  FeatureMatrix::Matrix out = x.values();
  const auto rows = out.rows();
  if (rows == 0) return FeatureMatrix(std::move(out));
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    auto col = out.col(c);
    double mean = col.mean();
    col.array() -= mean;
    double var = col.squaredNorm() / static_cast<double>(rows);
    double sd = std::sqrt(var);
    if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
      col.setZero();
    } else {
      col /= sd;
    }
  }
  return FeatureMatrix(std::move(out));
}

Matrix LinearClassifier::scores(const FeatureMatrix& x) const {
  if (x.dim() != dim())
    throw Error("classifier expects " + std::to_string(dim()) + " features, got " + std::to_string(x.dim()));
  Matrix s = x.values() * weights;
  s.rowwise() += bias.transpose();
  return s;
}

double softmax_objective(const Matrix& x, const Matrix& y, const Matrix& w, const Vector& b, double l2,
                         Matrix* grad_w, Vector* grad_b) {
  const auto n = static_cast<double>(x.rows());
  Matrix logits = x * w;
  logits.rowwise() += b.transpose();
  double loss = 0.0;
  Matrix residual(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double top = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - top).exp();
    double z = e.sum();
    double log_z = top + std::log(z);
    loss -= (y.row(i).array() * (logits.row(i).array() - log_z)).sum();
    residual.row(i) = e / z - y.row(i);
  }
  loss = loss / n + l2 * w.squaredNorm();
  if (grad_w) *grad_w = x.transpose() * residual / n + 2.0 * l2 * w;
  if (grad_b) *grad_b = residual.colwise().sum().transpose() / n;
  return loss;
}

double logistic_objective(const Matrix& x, const Vector& y, const Vector& w, double b, double l2, Vector* grad_w,
                          double* grad_b) {
  const auto n = static_cast<double>(x.rows());
  Vector z = x * w;
  z.array() += b;
  double loss = 0.0;
  Vector residual(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += softplus(z(i)) - y(i) * z(i);
    residual(i) = sigmoid(z(i)) - y(i);
  }
  loss = loss / n + l2 * w.squaredNorm();
  if (grad_w) *grad_w = x.transpose() * residual / n + 2.0 * l2 * w;
  if (grad_b) *grad_b = residual.sum() / n;
  return loss;
}

LinearClassifier fit_classifier(const FeatureMatrix& x_train, const LabelSet& y_train, const SgcConfig& cfg,
                                TrainingTrace* trace) {
  cfg.validate();
  if (x_train.rows() != y_train.size())
    throw Error("fit_classifier: " + std::to_string(x_train.rows()) + " feature rows but " +
                std::to_string(y_train.size()) + " labels");
  if (x_train.rows() == 0) throw Error("fit_classifier: empty training set");
  const std::size_t classes = y_train.num_classes();
  if (classes < 2) throw Error("fit_classifier: need at least two classes");
  std::set<ClassId> present;
  for (std::size_t i = 0; i < y_train.size(); ++i)
    for (ClassId c : y_train.classes(i)) present.insert(c);
  if (present.size() < 2) throw Error("fit_classifier: degenerate input, training set holds a single class");

  const Matrix x = x_train.values();
  const auto n = x.rows(), d = x.cols(), C = static_cast<Eigen::Index>(classes);
  LinearClassifier model;
  model.mode = cfg.classifier_mode;
  if (trace) *trace = {};

  if (cfg.classifier_mode == ClassifierMode::softmax) {
    if (y_train.mode() != LabelMode::single) throw Error("fit_classifier: softmax mode needs single-label targets");
    Matrix y = Matrix::Zero(n, C);
    for (Eigen::Index i = 0; i < n; ++i) y(i, y_train.label(static_cast<std::size_t>(i))) = 1.0;
    SoftmaxParams start{Matrix::Zero(d, C), Vector::Zero(C)};
    auto objective = [&](const SoftmaxParams& p, SoftmaxParams& g) {
      return softmax_objective(x, y, p.w, p.b, cfg.l2_weight, &g.w, &g.b);
    };
    auto fitted = descend(std::move(start), objective, cfg, trace);
    model.weights = std::move(fitted.w);
    model.bias = std::move(fitted.b);
    return model;
  }

  model.weights = Matrix::Zero(d, C);
  model.bias = Vector::Zero(C);
  for (Eigen::Index c = 0; c < C; ++c) {
    Vector y = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      auto cls = y_train.classes(static_cast<std::size_t>(i));
      if (std::binary_search(cls.begin(), cls.end(), static_cast<ClassId>(c))) y(i) = 1.0;
    }
    LogisticParams start{Vector::Zero(d), 0.0};
    auto objective = [&](const LogisticParams& p, LogisticParams& g) {
      return logistic_objective(x, y, p.w, p.b, cfg.l2_weight, &g.w, &g.b);
    };
    auto fitted = descend(std::move(start), objective, cfg, trace);
    model.weights.col(c) = fitted.w;
    model.bias(c) = fitted.b;
  }
  return model;
}

LabelSet predict(const LinearClassifier& model, const FeatureMatrix& x,
                 std::optional<std::span<const std::size_t>> multi_label_counts) {
  Matrix s = model.scores(x);
  const std::size_t n = x.rows(), C = model.num_classes();
  std::vector<std::vector<ClassId>> out(n);

  if (model.mode == ClassifierMode::softmax) {
    if (multi_label_counts) throw Error("predict: label counts only apply to one-vs-rest models");
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      for (Eigen::Index c = 1; c < static_cast<Eigen::Index>(C); ++c)
        if (s(static_cast<Eigen::Index>(i), c) > s(static_cast<Eigen::Index>(i), best)) best = c;
      out[i] = {static_cast<ClassId>(best)};
    }
    return LabelSet(LabelMode::single, C, std::move(out));
  }

  if (multi_label_counts && multi_label_counts->size() != n)
    throw Error("predict: label count list does not match row count");
  std::vector<ClassId> order(C);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = s.row(static_cast<Eigen::Index>(i));
    std::iota(order.begin(), order.end(), ClassId{0});
    std::stable_sort(order.begin(), order.end(), [&](ClassId a, ClassId b) { return row(a) > row(b); });
    if (multi_label_counts) {
      std::size_t k = (*multi_label_counts)[i];
      if (k == 0 || k > C)
        throw Error("predict: label count " + std::to_string(k) + " outside [1, " + std::to_string(C) + "]");
      out[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
      for (ClassId c : order)
        if (row(c) > 0.0) out[i].push_back(c);
      if (out[i].empty()) out[i].push_back(order.front());
    }
  }
  return LabelSet(LabelMode::multi, C, std::move(out));
}

void save_classifier(const std::filesystem::path& prefix, const LinearClassifier& model) {
  nlohmann::json header = {{"format", "featforge-linear-classifier"},
                           {"version", 1},
                           {"mode", mode_name(model.mode)},
                           {"dim", model.dim()},
                           {"classes", model.num_classes()}};
  std::ofstream out(prefix.string() + ".json", std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + prefix.string() + ".json");
  out << header.dump(2) << '\n';
  FeatureMatrix::Matrix table(model.weights.rows() + 1, model.weights.cols());
  table.topRows(model.weights.rows()) = model.weights;
  table.bottomRows(1) = model.bias.transpose();
  write_feature_matrix(prefix.string() + ".weights.csv", FeatureMatrix(std::move(table)));
}

LinearClassifier load_classifier(const std::filesystem::path& prefix) {
  std::ifstream in(prefix.string() + ".json");
  if (!in) throw Error("cannot open " + prefix.string() + ".json");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(prefix.string() + ".json: " + e.what());
  }
  if (header.value("format", "") != "featforge-linear-classifier") throw Error("not a classifier header");
  auto table = load_feature_matrix(prefix.string() + ".weights.csv");
  auto dim = header.at("dim").get<std::size_t>(), classes = header.at("classes").get<std::size_t>();
  if (table.rows() != dim + 1 || table.dim() != classes) throw Error("classifier weights do not match header");
  LinearClassifier model;
  auto mode = header.at("mode").get<std::string>();
  if (mode == "softmax") {
    model.mode = ClassifierMode::softmax;
  } else if (mode == "one_vs_rest") {
    model.mode = ClassifierMode::one_vs_rest;
  } else {
    throw Error("unknown classifier mode '" + mode + "'");
  }
  model.weights = table.values().topRows(static_cast<Eigen::Index>(dim));
  model.bias = table.values().bottomRows(1).transpose();
  return model;
}

}  // namespace featforge
