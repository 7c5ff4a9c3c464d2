#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace glucolens {

enum class RowOrigin { Real, Augmented, Synthetic };

// Training matrix with per-row provenance. `source` holds the id of the real
// row each row was derived from, so leaks into a test split can be audited.
struct TrainingSet {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<RowOrigin> origin;
  std::vector<Eigen::Index> source;

  // All rows real; ids default to 0..n-1.
  static TrainingSet real(Eigen::MatrixXd X, Eigen::VectorXd y,
                          std::vector<Eigen::Index> ids = {});

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
  Eigen::Index count(RowOrigin o) const;
};

struct AugmentConfig {
  double sigma = 0.05;
  int factor = 1;
  std::uint64_t seed = 0;
  // Skip the standardization check.
  bool allow_unscaled = false;
};

struct AdasynConfig {
  int k_neighbors = 5;
  double beta = 1.0;
  std::uint64_t seed = 0;
};

// Appends `factor` noisy copies of every row. Only the real rows are checked
// for standardization; columns with zero spread are exempt from the sd test.
TrainingSet gaussian_augment(const TrainingSet& data, const AugmentConfig& cfg);

// Oversamples the minority class of 0/1 labels. Originals are kept as a prefix.
TrainingSet adasyn_balance(const TrainingSet& data, const AdasynConfig& cfg);

}  // namespace glucolens
