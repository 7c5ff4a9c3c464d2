#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "glucolens/random.hpp"

namespace glucolens {

enum class Task { Regression, Classification };

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

// Axis-aligned binary tree; rows with x[feature] <= threshold go left.
class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<TreeNode> nodes);

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  int leaf_count() const;
  int depth() const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
};

// How per-row statistics (a, b) are scored. Variance uses (1, y), Gini uses
// (1 - y, y), Newton uses (gradient, hessian).
enum class SplitCriterion { Variance, Gini, Newton };

struct GrowOptions {
  SplitCriterion criterion = SplitCriterion::Variance;
  int max_leaf_nodes = 0;  // 0: unlimited
  int max_depth = 0;       // 0: unlimited
  int max_features = 0;    // features drawn per split; 0: all
  int min_samples_leaf = 1;
  double lambda = 0.0;            // Newton only
  double min_child_weight = 0.0;  // Newton only; minimum hessian sum per child
};

using RowStat = std::array<double, 2>;

// Grows a tree best-first: the leaf with the largest gain is split next,
// until the leaf cap is hit or no split improves the score. `rows` may repeat
// indices (bootstrap samples); `stats` is indexed by row of X. Split search
// breaks gain ties by lowest feature index, then lowest threshold.
Tree grow_tree(const Eigen::MatrixXd& X, std::span<const Eigen::Index> rows,
               std::span<const RowStat> stats, const GrowOptions& opts, Rng& rng);

}  // namespace glucolens
