#pragma once

#include <Eigen/Dense>

namespace glucolens {

struct RidgeModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  double alpha = 0.0;

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

// Solves (Xc'Xc + alpha I) w = Xc'yc on column-centred data; the intercept is
// not penalised. Raises SingularSystem when alpha is 0 and X is rank deficient.
RidgeModel ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha);

}  // namespace glucolens
