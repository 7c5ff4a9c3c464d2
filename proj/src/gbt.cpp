#include "glucolens/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "glucolens/error.hpp"

namespace glucolens {

namespace {

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

Eigen::VectorXd GbtModel::margin(const Eigen::MatrixXd& X) const {
  if (X.cols() != n_features)
    fail(ErrorCode::DimensionMismatch, fmt::format("model expects {} features, got {}", n_features, X.cols()));
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(X.row(i));
    out(i) = base_score + params.learning_rate * sum;
  }
  return out;
}

Eigen::VectorXd GbtModel::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd m = margin(X);
  if (params.task == Task::Classification) m = m.unaryExpr(&sigmoid);
  return m;
}

Eigen::MatrixXd GbtModel::predict_proba(const Eigen::MatrixXd& X) const {
  if (params.task != Task::Classification)
    fail(ErrorCode::InvalidHyperparameter, "predict_proba needs a classification model");
  const Eigen::VectorXd p1 = predict(X);
  Eigen::MatrixXd out(X.rows(), 2);
  out.col(0) = 1.0 - p1.array();
  out.col(1) = p1;
  return out;
}

Eigen::VectorXi GbtModel::predict_label(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd p = predict_proba(X);
  return (p.col(1).array() > p.col(0).array()).cast<int>();
}

GbtModel gbt_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GbtParams& params) {
  if (params.n_rounds < 1) fail(ErrorCode::InvalidHyperparameter, "n_rounds must be >= 1");
  if (!(params.learning_rate >= 0.0 && params.learning_rate <= 1.0))
    fail(ErrorCode::InvalidHyperparameter, "learning_rate must be in [0, 1]");
  if (params.max_depth < 1) fail(ErrorCode::InvalidHyperparameter, "max_depth must be >= 1");
  if (!(params.l2_leaf_penalty >= 0.0)) fail(ErrorCode::InvalidHyperparameter, "l2_leaf_penalty must be >= 0");
  if (!(params.colsample > 0.0 && params.colsample <= 1.0))
    fail(ErrorCode::InvalidHyperparameter, "colsample must be in (0, 1]");
  if (X.rows() == 0 || X.cols() == 0) fail(ErrorCode::EmptyData, "boosting needs at least one row and feature");
  if (X.rows() != y.size())
    fail(ErrorCode::DimensionMismatch, fmt::format("{} rows but {} targets", X.rows(), y.size()));

  const bool classify = params.task == Task::Classification;
  GbtModel model;
  model.params = params;
  model.n_features = X.cols();
  if (classify) {
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (y(i) != 0.0 && y(i) != 1.0) fail(ErrorCode::InvalidRecord, "classification labels must be 0 or 1");
    const double p = std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
    model.base_score = std::log(p / (1.0 - p));
  } else {
    model.base_score = y.mean();
  }

  GrowOptions opts;
  opts.criterion = SplitCriterion::Newton;
  opts.max_depth = params.max_depth;
  opts.lambda = params.l2_leaf_penalty;
  opts.min_child_weight = params.min_child_weight;

  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<int>(X.cols());
  const int per_tree = std::max(1, static_cast<int>(std::lround(params.colsample * p)));
  std::vector<Eigen::Index> rows(n);
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  Eigen::VectorXd F = Eigen::VectorXd::Constant(X.rows(), model.base_score);
  std::vector<RowStat> stats(n);
  Eigen::MatrixXd Xsub;

  for (int round = 0; round < params.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      if (classify) {
        const double q = sigmoid(F(r));
        stats[i] = {q - y(r), std::max(q * (1.0 - q), 1e-16)};
      } else {
        stats[i] = {F(r) - y(r), 1.0};
      }
    }
    Rng rng = make_rng(params.seed, {static_cast<std::uint64_t>(round)});
    Tree tree;
    if (per_tree < p) {
      // Grow on a column subset, then map the split features back.
      std::vector<int> cols(static_cast<std::size_t>(p));
      std::iota(cols.begin(), cols.end(), 0);
      for (int i = 0; i < per_tree; ++i)
        std::swap(cols[i], cols[i + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(p - i)))]);
      cols.resize(static_cast<std::size_t>(per_tree));
      std::sort(cols.begin(), cols.end());
      Xsub.resize(X.rows(), per_tree);
      for (int j = 0; j < per_tree; ++j) Xsub.col(j) = X.col(cols[j]);
      auto nodes = grow_tree(Xsub, rows, stats, opts, rng).nodes();
      for (auto& node : nodes)
        if (node.feature >= 0) node.feature = cols[node.feature];
      tree = Tree(std::move(nodes));
    } else {
      tree = grow_tree(X, rows, stats, opts, rng);
    }
    for (Eigen::Index i = 0; i < X.rows(); ++i) F(i) += params.learning_rate * tree.predict(X.row(i));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace glucolens
