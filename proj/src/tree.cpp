#include "glucolens/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "glucolens/error.hpp"

namespace glucolens {

Tree::Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) fail(ErrorCode::InvalidRecord, "tree has no nodes");
  const int n = static_cast<int>(nodes_.size());
  for (const auto& node : nodes_)
    if (node.feature >= 0 && (node.left <= 0 || node.left >= n || node.right <= 0 || node.right >= n))
      fail(ErrorCode::InvalidRecord, "tree child index out of range");
}

double Tree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& node = nodes_[i];
    i = x(node.feature) <= node.threshold ? node.left : node.right;
  }
  return nodes_[i].value;
}

int Tree::leaf_count() const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(), [](auto& n) { return n.feature < 0; }));
}

int Tree::depth() const {
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes_[i].feature >= 0) d[nodes_[i].left] = d[nodes_[i].right] = d[i] + 1;
  }
  return best;
}

namespace {

struct Scorer {
  SplitCriterion criterion;
  double lambda;

  double score(const RowStat& s) const {
    switch (criterion) {
      case SplitCriterion::Variance:
        return s[0] > 0 ? s[1] * s[1] / s[0] : 0.0;
      case SplitCriterion::Gini: {
        const double n = s[0] + s[1];
        return n > 0 ? (s[0] * s[0] + s[1] * s[1]) / n : 0.0;
      }
      case SplitCriterion::Newton:
        return s[1] + lambda > 0 ? s[0] * s[0] / (s[1] + lambda) : 0.0;
    }
    return 0.0;
  }

  double leaf(const RowStat& s) const {
    switch (criterion) {
      case SplitCriterion::Variance:
        return s[0] > 0 ? s[1] / s[0] : 0.0;
      case SplitCriterion::Gini: {
        const double n = s[0] + s[1];
        return n > 0 ? s[1] / n : 0.0;
      }
      case SplitCriterion::Newton:
        return s[1] + lambda > 0 ? -s[0] / (s[1] + lambda) : 0.0;
    }
    return 0.0;
  }
};

struct Candidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

struct PendingLeaf {
  int node;
  int depth;
  std::vector<Eigen::Index> rows;  // sorted ascending
  Candidate split;
};

class Grower {
 public:
  Grower(const Eigen::MatrixXd& X, std::span<const RowStat> stats, const GrowOptions& opts, Rng& rng)
      : X_(X), stats_(stats), opts_(opts), rng_(rng), scorer_{opts.criterion, opts.lambda} {
    features_.resize(static_cast<std::size_t>(X.cols()));
    std::iota(features_.begin(), features_.end(), 0);
  }

  RowStat total(const std::vector<Eigen::Index>& rows) const {
    RowStat s{0.0, 0.0};
    for (auto r : rows) {
      s[0] += stats_[r][0];
      s[1] += stats_[r][1];
    }
    return s;
  }

  bool child_ok(std::size_t count, const RowStat& s) const {
    if (static_cast<int>(count) < opts_.min_samples_leaf) return false;
    if (opts_.criterion == SplitCriterion::Newton && s[1] < opts_.min_child_weight) return false;
    return true;
  }

  std::vector<int> draw_features() {
    const int p = static_cast<int>(features_.size());
    const int m = opts_.max_features > 0 ? std::min(opts_.max_features, p) : p;
    if (m == p) return features_;
    std::vector<int> pool = features_;
    for (int i = 0; i < m; ++i) {
      const int j = i + static_cast<int>(uniform_index(rng_, static_cast<std::size_t>(p - i)));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(m);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  Candidate best_split(const std::vector<Eigen::Index>& rows, int depth) {
    Candidate best;
    if (rows.size() < 2) return best;
    if (opts_.max_depth > 0 && depth >= opts_.max_depth) return best;
    const RowStat parent = total(rows);
    const double parent_score = scorer_.score(parent);
    const double tol = 1e-10 * std::max(1.0, std::abs(parent_score));

    std::vector<std::pair<double, Eigen::Index>> order(rows.size());
    for (int f : draw_features()) {
      for (std::size_t i = 0; i < rows.size(); ++i) order[i] = {X_(rows[i], f), rows[i]};
      std::sort(order.begin(), order.end());
      RowStat left{0.0, 0.0};
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        left[0] += stats_[order[i].second][0];
        left[1] += stats_[order[i].second][1];
        const double lo = order[i].first, hi = order[i + 1].first;
        if (!(lo < hi)) continue;
        const RowStat right{parent[0] - left[0], parent[1] - left[1]};
        if (!child_ok(i + 1, left) || !child_ok(order.size() - i - 1, right)) continue;
        const double gain = scorer_.score(left) + scorer_.score(right) - parent_score;
        if (gain > tol && gain > best.gain) {
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;
          best = {gain, f, mid};
        }
      }
    }
    return best;
  }

  Tree grow(std::span<const Eigen::Index> root_rows) {
    std::vector<TreeNode> nodes(1);
    std::vector<Eigen::Index> rows(root_rows.begin(), root_rows.end());
    std::sort(rows.begin(), rows.end());
    nodes[0].value = scorer_.leaf(total(rows));

    auto cmp = [](const PendingLeaf& a, const PendingLeaf& b) {
      if (a.split.gain != b.split.gain) return a.split.gain < b.split.gain;
      return a.node > b.node;
    };
    std::priority_queue<PendingLeaf, std::vector<PendingLeaf>, decltype(cmp)> queue(cmp);
    auto consider = [&](int node, int depth, std::vector<Eigen::Index> r) {
      Candidate c = best_split(r, depth);
      if (c.feature >= 0) queue.push({node, depth, std::move(r), c});
    };
    consider(0, 0, std::move(rows));

    int leaves = 1;
    while (!queue.empty() && (opts_.max_leaf_nodes <= 0 || leaves < opts_.max_leaf_nodes)) {
      PendingLeaf leaf = queue.top();
      queue.pop();
      std::vector<Eigen::Index> left, right;
      for (auto r : leaf.rows) (X_(r, leaf.split.feature) <= leaf.split.threshold ? left : right).push_back(r);
      const int li = static_cast<int>(nodes.size());
      nodes.push_back({.value = scorer_.leaf(total(left))});
      nodes.push_back({.value = scorer_.leaf(total(right))});
      auto& parent = nodes[leaf.node];
      parent.feature = leaf.split.feature;
      parent.threshold = leaf.split.threshold;
      parent.left = li;
      parent.right = li + 1;
      ++leaves;
      consider(li, leaf.depth + 1, std::move(left));
      consider(li + 1, leaf.depth + 1, std::move(right));
    }
    return Tree(std::move(nodes));
  }

 private:
  const Eigen::MatrixXd& X_;
  std::span<const RowStat> stats_;
  const GrowOptions& opts_;
  Rng& rng_;
  Scorer scorer_;
  std::vector<int> features_;
};

}  // namespace

Tree grow_tree(const Eigen::MatrixXd& X, std::span<const Eigen::Index> rows,
               std::span<const RowStat> stats, const GrowOptions& opts, Rng& rng) {
  if (rows.empty()) fail(ErrorCode::EmptyData, "cannot grow a tree on zero rows");
  if (static_cast<Eigen::Index>(stats.size()) != X.rows())
    fail(ErrorCode::DimensionMismatch, "one statistic per row of X is required");
  return Grower(X, stats, opts, rng).grow(rows);
}

}  // namespace glucolens
