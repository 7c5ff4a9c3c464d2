#include <doctest.h>

#include "glucolens/random.hpp"
#include "glucolens/ridge.hpp"
#include "helpers.hpp"

using namespace glucolens;
using testing_helpers::error_of;

namespace {

// Normal equations on the intercept-augmented design, penalising only the
// slope coefficients, solved by full-pivot LU.
std::pair<Eigen::VectorXd, double> normal_equation_oracle(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                                          double alpha) {
  const Eigen::Index n = X.rows(), p = X.cols();
  Eigen::MatrixXd D(n, p + 1);
  D.col(0).setOnes();
  D.rightCols(p) = X;
  Eigen::MatrixXd A = D.transpose() * D;
  for (Eigen::Index j = 1; j <= p; ++j) A(j, j) += alpha;
  const Eigen::VectorXd beta = A.fullPivLu().solve(D.transpose() * y);
  return {beta.tail(p), beta(0)};
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> random_problem(std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::Index n = 20 + static_cast<Eigen::Index>(uniform_index(rng, 60));
  const Eigen::Index p = 1 + static_cast<Eigen::Index>(uniform_index(rng, 8));
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = standard_normal(rng);
  Eigen::VectorXd w(p);
  for (Eigen::Index j = 0; j < p; ++j) w(j) = 3.0 * standard_normal(rng);
  Eigen::VectorXd y = X * w;
  for (Eigen::Index i = 0; i < n; ++i) y(i) += 5.0 + 0.3 * standard_normal(rng);
  return {X, y};
}

}  // namespace

TEST_CASE("exact linear data with alpha 0 recovers slope and intercept") {
  Eigen::MatrixXd X(3, 1);
  X << 1, 2, 3;
  Eigen::VectorXd y(3);
  y << 2, 4, 6;
  auto m = ridge_fit(X, y, 0.0);
  CHECK(m.weights(0) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(std::abs(m.intercept) < 1e-8);
  CHECK(std::abs(ridge_fit(X, y, 100.0).weights(0)) < 2.0);
}

TEST_CASE("ridge matches the normal-equation oracle on 50 random problems") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto [X, y] = random_problem(seed);
    for (double alpha : {0.0, 0.01, 0.1, 1.0, 10.0}) {
      auto m = ridge_fit(X, y, alpha);
      auto [w, b] = normal_equation_oracle(X, y, alpha);
      CHECK((m.weights - w).cwiseAbs().maxCoeff() < 1e-8);
      CHECK(std::abs(m.intercept - b) < 1e-8);
    }
  }
}

TEST_CASE("the Table 2 alpha grid fits well-conditioned data") {
  auto [X, y] = random_problem(99);
  for (double alpha : {1.0, 0.1, 0.01}) CHECK(ridge_fit(X, y, alpha).weights.allFinite());
}

TEST_CASE("weight norm shrinks monotonically as alpha grows") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto [X, y] = random_problem(100 + seed);
    double prev = INFINITY;
    for (double alpha : {0.1, 10.0, 1000.0, 1e6}) {
      const double norm = ridge_fit(X, y, alpha).weights.norm();
      CHECK(norm < prev);
      prev = norm;
    }
    CHECK(prev < 1e-2);
  }
}

TEST_CASE("ridge prediction and errors") {
  Eigen::MatrixXd X(4, 2);
  X << 1, 2, 2, 4, 3, 6, 4, 8;  // collinear columns
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  CHECK(error_of([&] { ridge_fit(X, y, 0.0); }) == ErrorCode::SingularSystem);
  auto m = ridge_fit(X, y, 1.0);
  CHECK(m.predict(X).size() == 4);
  CHECK(error_of([&] { m.predict(Eigen::MatrixXd::Zero(2, 3)); }) == ErrorCode::DimensionMismatch);
  CHECK(error_of([&] { ridge_fit(X, y, -1.0); }) == ErrorCode::InvalidHyperparameter);
  CHECK(error_of([&] { ridge_fit(X.topRows(1), y.head(1), 1.0); }) == ErrorCode::EmptyData);
}
