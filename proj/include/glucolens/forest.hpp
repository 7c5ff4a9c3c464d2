#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "glucolens/tree.hpp"

namespace glucolens {

struct ForestParams {
  int n_estimators = 100;
  int max_leaf_nodes = 0;  // 0: no cap
  Task task = Task::Regression;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct ForestModel {
  std::vector<Tree> trees;
  ForestParams params;
  Eigen::Index n_features = 0;

  // Mean of tree outputs. For classification this is P(class 1).
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
  // Columns are P(class 0), P(class 1).
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const;
  // Argmax of predict_proba; ties go to class 0.
  Eigen::VectorXi predict_label(const Eigen::MatrixXd& X) const;
};

// Bagged CART. Rows are put in a canonical order before bootstrapping so the
// fitted forest does not depend on the order of the training rows.
ForestModel forest_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestParams& params);

}  // namespace glucolens
