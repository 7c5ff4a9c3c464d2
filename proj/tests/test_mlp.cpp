#include <doctest.h>

#include "glucolens/mlp.hpp"
#include "glucolens/random.hpp"
#include "helpers.hpp"

using namespace glucolens;
using testing_helpers::error_of;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = standard_normal(rng);
  return X;
}

MlpModel fresh(int variation, Eigen::Index p, Task task, std::uint64_t seed) {
  MlpModel m = mlp_init(mlp_variation(variation), p, task, seed);
  m.variation_id = variation;
  m.hyper.seed = seed;
  return m;
}

}  // namespace

TEST_CASE("variation table") {
  CHECK(mlp_variation(1) == std::vector<int>{20, 10, 5});
  CHECK(mlp_variation(5) == std::vector<int>{100, 50, 25, 12, 6});
  CHECK(mlp_variation(9) == std::vector<int>{80, 40, 20, 20, 20, 20, 10, 5});
  CHECK(mlp_variation(13) == std::vector<int>{160, 80, 40, 40, 40, 40, 20, 10});
  const int depth[] = {3, 4, 4, 5, 5, 5, 5, 5, 8, 8, 8, 8, 8};
  for (int v = 1; v <= 13; ++v) CHECK(static_cast<int>(mlp_variation(v).size()) == depth[v - 1]);
  CHECK(error_of([] { mlp_variation(14); }) == ErrorCode::InvalidHyperparameter);

  auto X = gaussian(40, 6, 1);
  Eigen::VectorXd y = X.col(0);
  auto m = mlp_fit(X, y, 13, Task::Regression, {.epochs = 2});
  CHECK(m.layer_sizes == mlp_variation(13));
  CHECK(m.W.size() == 9);
  CHECK(m.W.front().rows() == 160);
  CHECK(m.W.back().rows() == 1);
}

TEST_CASE("variation 1 learns XOR within 2000 epochs") {
  Eigen::MatrixXd X(4, 2);
  X << 0, 0, 0, 1, 1, 0, 1, 1;
  Eigen::VectorXd y(4);
  y << 0, 1, 1, 0;
  auto m = mlp_fit(X, y, 1, Task::Classification, {.epochs = 2000, .patience = 2000, .seed = 3});
  CHECK(m.predict_label(X) == y.cast<int>());
}

TEST_CASE("backprop matches finite differences on variations 1, 5 and 13") {
  auto X = gaussian(5, 27, 4);
  Eigen::VectorXd y = gaussian(5, 1, 5).col(0);
  Eigen::VectorXd labels(5);
  labels << 0, 1, 1, 0, 1;
  for (int v : {1, 5, 13}) {
    for (Task task : {Task::Regression, Task::Classification}) {
      CAPTURE(v);
      auto r = gradient_check(fresh(v, 27, task, 6 + v), X, task == Task::Regression ? y : labels);
      CHECK(r.max_rel_error < 1e-4);
      CHECK(r.parameters <= 5000);
      CHECK(r.checked > r.parameters / 2);
    }
  }
}

TEST_CASE("a zero-weight net on zero inputs has exact weight gradients") {
  auto m = fresh(1, 4, Task::Regression, 1);
  for (auto& W : m.W) W.setZero();
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(5, 4);
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(5, -1, 1);
  auto r = gradient_check(m, X, y);
  for (double e : r.weight_error) CHECK(e == 0.0);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("the gradient check detects a corrupted layer") {
  auto X = gaussian(5, 8, 7);
  Eigen::VectorXd y = gaussian(5, 1, 8).col(0);
  auto m = fresh(1, 8, Task::Regression, 9);
  auto r = gradient_check(m, X, y, [](MlpGradients& g) { g.dW[1] *= 2.0; });
  CHECK(r.max_rel_error > 0.1);
  CHECK(r.weight_error[0] < 1e-4);
}

TEST_CASE("down-scaling keeps layer count and fits the parameter budget") {
  auto m = fresh(13, 27, Task::Regression, 1);
  CHECK(m.parameter_count() > 5000);
  auto s = mlp_downscale(m, 5000, 2);
  CHECK(s.parameter_count() <= 5000);
  CHECK(s.layer_sizes.size() == 8);
  CHECK(s.parameter_count() > 2500);
  auto small = fresh(1, 27, Task::Regression, 1);
  CHECK(mlp_downscale(small, 5000, 2).W[0] == small.W[0]);
}

TEST_CASE("training loss falls over the first 10 epochs on planted linear data") {
  double first = 0.0, tenth = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto X = gaussian(200, 5, 100 + seed);
    Eigen::VectorXd y = 2.0 * X.col(0) - X.col(1) + 0.5 * X.col(2);
    auto m = mlp_fit(X, y, 1, Task::Regression, {.epochs = 10, .seed = seed});
    REQUIRE(m.loss_curve.size() == 10);
    first += m.loss_curve.front();
    tenth += m.loss_curve.back();
  }
  CHECK(tenth < first);
}

TEST_CASE("regression fits recover a planted signal in original units") {
  auto X = gaussian(300, 3, 11);
  Eigen::VectorXd y = (100.0 + 10.0 * X.col(0).array()).matrix();
  auto m = mlp_fit(X, y, 1, Task::Regression, {.epochs = 300, .seed = 1});
  auto Xt = gaussian(100, 3, 12);
  Eigen::VectorXd yt = (100.0 + 10.0 * Xt.col(0).array()).matrix();
  const double rmse = std::sqrt((m.predict(Xt) - yt).squaredNorm() / 100.0);
  CHECK(rmse < 2.0);
}

TEST_CASE("MLP fits are deterministic for a seed") {
  auto X = gaussian(64, 4, 13);
  Eigen::VectorXd y = X.col(1);
  auto a = mlp_fit(X, y, 2, Task::Regression, {.epochs = 20, .seed = 5});
  auto b = mlp_fit(X, y, 2, Task::Regression, {.epochs = 20, .seed = 5});
  auto c = mlp_fit(X, y, 2, Task::Regression, {.epochs = 20, .seed = 6});
  CHECK(a.predict(X) == b.predict(X));
  CHECK(a.predict(X) != c.predict(X));
}

TEST_CASE("MLP errors") {
  auto X = gaussian(10, 3, 14);
  Eigen::VectorXd y = X.col(0);
  Eigen::MatrixXd huge = X * 1e200;
  Eigen::VectorXd yhuge = y * 1e200;
  yhuge(0) = 1e300;
  CHECK(error_of([&] { mlp_fit(huge, yhuge, 1, Task::Regression, {.learning_rate = 1e3, .epochs = 50}); }) ==
        ErrorCode::DivergedLoss);
  auto m = mlp_fit(X, y, 1, Task::Regression, {.epochs = 1});
  CHECK(error_of([&] { m.predict(Eigen::MatrixXd::Zero(2, 4)); }) == ErrorCode::DimensionMismatch);
  CHECK(error_of([&] { m.predict_proba(X); }) == ErrorCode::InvalidHyperparameter);
  CHECK(error_of([&] { mlp_fit(X, y, 1, Task::Classification, {.epochs = 1}); }) == ErrorCode::InvalidRecord);
}
