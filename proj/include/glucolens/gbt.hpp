#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "glucolens/tree.hpp"

namespace glucolens {

struct GbtParams {
  int n_rounds = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  double l2_leaf_penalty = 1.0;
  double min_child_weight = 1.0;
  double colsample = 1.0;  // fraction of features offered to each tree
  Task task = Task::Regression;
  std::uint64_t seed = 0;
};

struct GbtModel {
  std::vector<Tree> trees;
  GbtParams params;
  double base_score = 0.0;
  Eigen::Index n_features = 0;

  // Raw additive score: base_score + learning_rate * sum of tree outputs.
  Eigen::VectorXd margin(const Eigen::MatrixXd& X) const;
  // Regression: the margin. Classification: P(class 1).
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const;
  Eigen::VectorXi predict_label(const Eigen::MatrixXd& X) const;
};

// Second-order boosting on squared-error (regression) or logistic loss
// (classification). Leaf values are -G / (H + l2_leaf_penalty).
GbtModel gbt_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GbtParams& params);

}  // namespace glucolens
