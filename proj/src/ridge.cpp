#include "glucolens/ridge.hpp"

#include <cmath>

#include <fmt/format.h>

#include "glucolens/error.hpp"

namespace glucolens {

Eigen::VectorXd RidgeModel::predict(const Eigen::MatrixXd& X) const {
  if (X.cols() != weights.size())
    fail(ErrorCode::DimensionMismatch,
         fmt::format("model expects {} features, got {}", weights.size(), X.cols()));
  return (X * weights).array() + intercept;
}

RidgeModel ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    fail(ErrorCode::InvalidHyperparameter, "alpha must be a finite value >= 0");
  if (X.rows() != y.size())
    fail(ErrorCode::DimensionMismatch, fmt::format("{} rows but {} targets", X.rows(), y.size()));
  if (X.rows() < 2) fail(ErrorCode::EmptyData, "ridge needs at least 2 rows");

  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::VectorXd w;
  if (alpha == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xc);
    if (qr.rank() < X.cols())
      fail(ErrorCode::SingularSystem,
           fmt::format("centred design has rank {} < {} features and alpha is 0", qr.rank(), X.cols()));
    w = qr.solve(yc);
  } else {
    Eigen::MatrixXd A = Xc.transpose() * Xc;
    A.diagonal().array() += alpha;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) fail(ErrorCode::SingularSystem, "normal matrix is not positive definite");
    w = llt.solve(Xc.transpose() * yc);
  }
  return {w, y_mean - x_mean.dot(w), alpha};
}

}  // namespace glucolens
