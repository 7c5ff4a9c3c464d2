#include "glucolens/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "glucolens/error.hpp"
#include "glucolens/random.hpp"

namespace glucolens {

TrainingSet TrainingSet::real(Eigen::MatrixXd X, Eigen::VectorXd y, std::vector<Eigen::Index> ids) {
  if (X.rows() != y.size())
    fail(ErrorCode::DimensionMismatch,
         fmt::format("{} feature rows but {} targets", X.rows(), y.size()));
  if (ids.empty()) {
    ids.resize(static_cast<std::size_t>(X.rows()));
    std::iota(ids.begin(), ids.end(), Eigen::Index{0});
  } else if (static_cast<Eigen::Index>(ids.size()) != X.rows()) {
    fail(ErrorCode::DimensionMismatch, "row id count differs from row count");
  }
  TrainingSet t;
  t.origin.assign(static_cast<std::size_t>(X.rows()), RowOrigin::Real);
  t.source = std::move(ids);
  t.X = std::move(X);
  t.y = std::move(y);
  return t;
}

Eigen::Index TrainingSet::count(RowOrigin o) const {
  return std::count(origin.begin(), origin.end(), o);
}

namespace {

void check_scaled(const TrainingSet& data) {
  std::vector<Eigen::Index> real;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    if (data.origin[static_cast<std::size_t>(i)] == RowOrigin::Real) real.push_back(i);
  if (real.size() < 2) return;
  const double n = static_cast<double>(real.size());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    double sum = 0.0;
    for (auto i : real) sum += data.X(i, j);
    const double mean = sum / n;
    double ss = 0.0;
    for (auto i : real) ss += (data.X(i, j) - mean) * (data.X(i, j) - mean);
    const double sd = std::sqrt(ss / n);
    const bool constant = sd < 1e-12;
    if (std::abs(mean) > 0.5 || (!constant && (sd < 0.5 || sd > 2.0)))
      fail(ErrorCode::UnscaledData,
           fmt::format("column {} has mean {:.3g} and sd {:.3g}; standardize first", j, mean, sd));
  }
}

}  // namespace

TrainingSet gaussian_augment(const TrainingSet& data, const AugmentConfig& cfg) {
  if (!(cfg.sigma >= 0.0)) fail(ErrorCode::InvalidHyperparameter, "sigma must be >= 0");
  if (cfg.factor < 0) fail(ErrorCode::InvalidHyperparameter, "factor must be >= 0");
  if (data.rows() == 0) fail(ErrorCode::EmptyDataset, "nothing to augment");
  if (!cfg.allow_unscaled) check_scaled(data);

  const Eigen::Index n = data.rows(), p = data.cols();
  const Eigen::Index total = n * (1 + cfg.factor);
  TrainingSet out;
  out.X.resize(total, p);
  out.y.resize(total);
  out.origin = data.origin;
  out.source = data.source;
  out.X.topRows(n) = data.X;
  out.y.head(n) = data.y;
  out.origin.resize(static_cast<std::size_t>(total), RowOrigin::Augmented);
  out.source.resize(static_cast<std::size_t>(total));

  for (Eigen::Index i = 0; i < n; ++i) {
    Rng rng = make_rng(cfg.seed, {static_cast<std::uint64_t>(i)});
    for (int c = 0; c < cfg.factor; ++c) {
      const Eigen::Index r = n * (1 + c) + i;
      for (Eigen::Index j = 0; j < p; ++j) out.X(r, j) = data.X(i, j) + cfg.sigma * standard_normal(rng);
      out.y(r) = data.y(i);
      out.source[static_cast<std::size_t>(r)] = data.source[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

namespace {

// Indices of the k nearest rows of `pool` to row `self` (excluded), by
// Euclidean distance with ties going to the lower index.
std::vector<Eigen::Index> nearest(const Eigen::MatrixXd& X, Eigen::Index self,
                                  const std::vector<Eigen::Index>& pool, std::size_t k) {
  std::vector<std::pair<double, Eigen::Index>> d;
  d.reserve(pool.size());
  for (auto j : pool)
    if (j != self) d.emplace_back((X.row(j) - X.row(self)).squaredNorm(), j);
  k = std::min(k, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(d[i].second);
  return out;
}

}  // namespace

TrainingSet adasyn_balance(const TrainingSet& data, const AdasynConfig& cfg) {
  if (cfg.k_neighbors < 1) fail(ErrorCode::InvalidHyperparameter, "k_neighbors must be >= 1");
  if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) fail(ErrorCode::InvalidHyperparameter, "beta must be in (0, 1]");
  if (data.rows() == 0) fail(ErrorCode::EmptyDataset, "nothing to balance");

  std::vector<Eigen::Index> cls[2], all;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const double v = data.y(i);
    if (v != 0.0 && v != 1.0)
      fail(ErrorCode::InvalidRecord, fmt::format("label {} at row {} is not 0 or 1", v, i));
    cls[v == 1.0 ? 1 : 0].push_back(i);
    all.push_back(i);
  }
  if (cls[0].empty() || cls[1].empty()) fail(ErrorCode::SingleClass, "both classes must be present");

  const int minority_label = cls[1].size() < cls[0].size() ? 1 : 0;
  const auto& minority = cls[minority_label];
  const auto n_min = static_cast<double>(minority.size());
  const auto n_maj = static_cast<double>(cls[1 - minority_label].size());
  const auto G = static_cast<std::size_t>(std::llround((n_maj - n_min) * cfg.beta));
  if (G == 0) return data;

  // Difficulty ratio r_i: share of majority points among the k nearest neighbours.
  const std::size_t k_all = std::min<std::size_t>(cfg.k_neighbors, all.size() - 1);
  std::vector<double> r(minority.size());
  for (std::size_t m = 0; m < minority.size(); ++m) {
    const auto nn = nearest(data.X, minority[m], all, k_all);
    double maj = 0;
    for (auto j : nn) maj += (data.y(j) == minority_label) ? 0.0 : 1.0;
    r[m] = maj / static_cast<double>(k_all);
  }
  double rsum = std::accumulate(r.begin(), r.end(), 0.0);
  if (rsum <= 0.0) {
    std::fill(r.begin(), r.end(), 1.0);
    rsum = static_cast<double>(r.size());
  }

  // Largest-remainder allocation of G across minority points.
  std::vector<std::size_t> g(minority.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t assigned = 0;
  for (std::size_t m = 0; m < minority.size(); ++m) {
    const double share = r[m] / rsum * static_cast<double>(G);
    g[m] = static_cast<std::size_t>(std::floor(share));
    assigned += g[m];
    rem.emplace_back(share - std::floor(share), m);
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < G; ++i, ++assigned) ++g[rem[i % rem.size()].second];

  const std::size_t k_min =
      std::clamp<std::size_t>(cfg.k_neighbors, 1, std::max<std::size_t>(1, minority.size() - 1));
  const Eigen::Index n = data.rows(), p = data.cols();
  TrainingSet out;
  out.X.resize(n + static_cast<Eigen::Index>(G), p);
  out.y.resize(n + static_cast<Eigen::Index>(G));
  out.X.topRows(n) = data.X;
  out.y.head(n) = data.y;
  out.origin = data.origin;
  out.source = data.source;

  Eigen::Index row = n;
  for (std::size_t m = 0; m < minority.size(); ++m) {
    if (g[m] == 0) continue;
    const Eigen::Index xi = minority[m];
    const auto nn = nearest(data.X, xi, minority, k_min);
    Rng rng = make_rng(cfg.seed, {static_cast<std::uint64_t>(xi)});
    for (std::size_t s = 0; s < g[m]; ++s, ++row) {
      if (nn.empty()) {
        out.X.row(row) = data.X.row(xi);
      } else {
        const Eigen::Index z = nn[uniform_index(rng, nn.size())];
        const double lambda = uniform01(rng);
        out.X.row(row) = data.X.row(xi) + lambda * (data.X.row(z) - data.X.row(xi));
      }
      out.y(row) = minority_label;
      out.origin.push_back(RowOrigin::Synthetic);
      out.source.push_back(data.source[static_cast<std::size_t>(xi)]);
    }
  }
  return out;
}

}  // namespace glucolens
