#include "glucolens/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "glucolens/error.hpp"

namespace glucolens {

namespace {

void check_width(const Eigen::MatrixXd& X, Eigen::Index expected) {
  if (X.cols() != expected)
    fail(ErrorCode::DimensionMismatch, fmt::format("model expects {} features, got {}", expected, X.cols()));
}

// Row permutation sorting rows lexicographically by (features..., target).
std::vector<Eigen::Index> canonical_order(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(X.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      if (X(a, j) != X(b, j)) return X(a, j) < X(b, j);
    return y(a) < y(b);
  });
  return order;
}

}  // namespace

Eigen::VectorXd ForestModel::predict(const Eigen::MatrixXd& X) const {
  check_width(X, n_features);
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(X.row(i));
    out(i) = sum / static_cast<double>(trees.size());
  }
  return out;
}

Eigen::MatrixXd ForestModel::predict_proba(const Eigen::MatrixXd& X) const {
  if (params.task != Task::Classification)
    fail(ErrorCode::InvalidHyperparameter, "predict_proba needs a classification forest");
  const Eigen::VectorXd p1 = predict(X);
  Eigen::MatrixXd out(X.rows(), 2);
  out.col(0) = 1.0 - p1.array();
  out.col(1) = p1;
  return out;
}

Eigen::VectorXi ForestModel::predict_label(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd p = predict_proba(X);
  return (p.col(1).array() > p.col(0).array()).cast<int>();
}

ForestModel forest_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestParams& params) {
  if (params.n_estimators < 1) fail(ErrorCode::InvalidHyperparameter, "n_estimators must be >= 1");
  if (params.max_leaf_nodes < 0 || params.max_leaf_nodes == 1)
    fail(ErrorCode::InvalidHyperparameter, "max_leaf_nodes must be 0 (no cap) or >= 2");
  if (X.rows() == 0 || X.cols() == 0) fail(ErrorCode::EmptyData, "forest needs at least one row and feature");
  if (X.rows() != y.size())
    fail(ErrorCode::DimensionMismatch, fmt::format("{} rows but {} targets", X.rows(), y.size()));

  const bool classify = params.task == Task::Classification;
  if (classify)
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (y(i) != 0.0 && y(i) != 1.0) fail(ErrorCode::InvalidRecord, "classification labels must be 0 or 1");

  const auto order = canonical_order(X, y);
  Eigen::MatrixXd Xs(X.rows(), X.cols());
  std::vector<RowStat> stats(static_cast<std::size_t>(X.rows()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    Xs.row(static_cast<Eigen::Index>(i)) = X.row(order[i]);
    const double v = y(order[i]);
    stats[i] = classify ? RowStat{1.0 - v, v} : RowStat{1.0, v};
  }

  const auto p = static_cast<double>(X.cols());
  GrowOptions opts;
  opts.criterion = classify ? SplitCriterion::Gini : SplitCriterion::Variance;
  opts.max_leaf_nodes = params.max_leaf_nodes;
  opts.max_features = static_cast<int>(classify ? std::ceil(std::sqrt(p)) : std::ceil(p / 3.0));

  ForestModel model;
  model.params = params;
  model.n_features = X.cols();
  model.trees.resize(static_cast<std::size_t>(params.n_estimators));

  const auto n = static_cast<std::size_t>(X.rows());
  auto fit_one = [&](int t) {
    Rng rng = make_rng(params.seed, {static_cast<std::uint64_t>(t)});
    std::vector<Eigen::Index> rows(n);
    for (auto& r : rows) r = static_cast<Eigen::Index>(uniform_index(rng, n));
    model.trees[static_cast<std::size_t>(t)] = grow_tree(Xs, rows, stats, opts, rng);
  };

  const int threads = std::clamp(params.threads, 1, params.n_estimators);
  if (threads == 1) {
    for (int t = 0; t < params.n_estimators; ++t) fit_one(t);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (int t = w; t < params.n_estimators; t += threads) fit_one(t);
      });
  }
  return model;
}

}  // namespace glucolens
