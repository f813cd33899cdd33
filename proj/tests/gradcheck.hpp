#pragma once

// Central finite-difference checks shared by the unit tests and the
// acceptance binary. Each function draws one random point from `seed` and
// returns ||analytic - numeric|| / max(||analytic||, ||numeric||).

#include "featforge/sgc.hpp"
#include "featforge/walk_embed.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <vector>

namespace gradcheck {

inline constexpr double kStep = 1e-5;

inline double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  double scale = std::max({analytic.norm(), numeric.norm(), 1e-12});
  return (analytic - numeric).norm() / scale;
}

inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd p) {
  Eigen::VectorXd g(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    double keep = p[i];
    p[i] = keep + kStep;
    double up = f(p);
    p[i] = keep - kStep;
    double down = f(p);
    p[i] = keep;
    g[i] = (up - down) / (2 * kStep);
  }
  return g;
}

/// Skip-gram pair loss over (center, context, negatives...) stacked in one vector.
inline double skipgram(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dims(2, 12), negs(1, 6);
  std::normal_distribution<double> normal(0.0, 0.7);
  const int d = dims(rng), k = negs(rng);
  Eigen::VectorXd p(d * (2 + k));
  for (auto& v : p) v = normal(rng);

  auto loss = [&](const Eigen::VectorXd& q) {
    std::vector<std::span<const double>> n;
    for (int j = 0; j < k; ++j) n.emplace_back(q.data() + d * (2 + j), d);
    return featforge::sgns_pair_loss({q.data(), static_cast<std::size_t>(d)},
                                     {q.data() + d, static_cast<std::size_t>(d)}, n);
  };
  std::vector<std::span<const double>> n;
  for (int j = 0; j < k; ++j) n.emplace_back(p.data() + d * (2 + j), d);
  auto g = featforge::sgns_pair_gradient({p.data(), static_cast<std::size_t>(d)},
                                         {p.data() + d, static_cast<std::size_t>(d)}, n);
  Eigen::VectorXd analytic(p.size());
  for (int i = 0; i < d; ++i) {
    analytic[i] = g.center[i];
    analytic[d + i] = g.context[i];
    for (int j = 0; j < k; ++j) analytic[d * (2 + j) + i] = g.negatives[j][i];
  }
  return relative_error(analytic, numeric_gradient(loss, p));
}

struct Problem {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;  // one-hot (softmax) or 0/1 column (logistic)
  double l2;
};

inline Problem random_problem(std::mt19937_64& rng, int classes) {
  std::uniform_int_distribution<int> rows(3, 15), dims(1, 6);
  std::normal_distribution<double> normal;
  const int n = rows(rng), d = dims(rng);
  Problem pr{Eigen::MatrixXd(n, d), Eigen::MatrixXd::Zero(n, classes), std::uniform_real_distribution<double>(0, 0.1)(rng)};
  for (auto& v : pr.x.reshaped()) v = normal(rng);
  std::uniform_int_distribution<int> cls(0, classes - 1);
  for (int i = 0; i < n; ++i) pr.y(i, cls(rng)) = 1.0;
  return pr;
}

/// Softmax cross-entropy gradient with respect to (W, b).
inline double softmax(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int c = std::uniform_int_distribution<int>(2, 5)(rng);
  Problem pr = random_problem(rng, c);
  const auto d = pr.x.cols();
  std::normal_distribution<double> normal;
  Eigen::VectorXd p(d * c + c);
  for (auto& v : p) v = normal(rng);

  auto unpack = [&](const Eigen::VectorXd& q, Eigen::MatrixXd& w, Eigen::VectorXd& b) {
    w = Eigen::Map<const Eigen::MatrixXd>(q.data(), d, c);
    b = q.tail(c);
  };
  auto loss = [&](const Eigen::VectorXd& q) {
    Eigen::MatrixXd w;
    Eigen::VectorXd b;
    unpack(q, w, b);
    return featforge::softmax_objective(pr.x, pr.y, w, b, pr.l2);
  };
  Eigen::MatrixXd w, gw;
  Eigen::VectorXd b, gb;
  unpack(p, w, b);
  featforge::softmax_objective(pr.x, pr.y, w, b, pr.l2, &gw, &gb);
  Eigen::VectorXd analytic(p.size());
  analytic.head(d * c) = gw.reshaped();
  analytic.tail(c) = gb;
  return relative_error(analytic, numeric_gradient(loss, p));
}

/// Binary logistic gradient with respect to (w, b).
inline double logistic(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Problem pr = random_problem(rng, 2);
  Eigen::VectorXd y = pr.y.col(1);
  const auto d = pr.x.cols();
  std::normal_distribution<double> normal;
  Eigen::VectorXd p(d + 1);
  for (auto& v : p) v = normal(rng);

  auto loss = [&](const Eigen::VectorXd& q) {
    return featforge::logistic_objective(pr.x, y, q.head(d), q[d], pr.l2);
  };
  Eigen::VectorXd gw;
  double gb = 0.0;
  featforge::logistic_objective(pr.x, y, p.head(d), p[d], pr.l2, &gw, &gb);
  Eigen::VectorXd analytic(p.size());
  analytic.head(d) = gw;
  analytic[d] = gb;
  return relative_error(analytic, numeric_gradient(loss, p));
}

}  // namespace gradcheck
