#include "glucolens/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "glucolens/error.hpp"
#include "glucolens/random.hpp"

namespace glucolens {

const std::vector<int>& mlp_variation(int variation_id) {
  static const std::vector<std::vector<int>> table = {
      {20, 10, 5},
      {40, 20, 10, 5},
      {60, 30, 15, 7},
      {80, 40, 20, 10, 5},
      {100, 50, 25, 12, 6},
      {120, 60, 30, 15, 7},
      {140, 70, 35, 17, 8},
      {160, 80, 40, 20, 10},
      {80, 40, 20, 20, 20, 20, 10, 5},
      {100, 50, 25, 25, 25, 25, 12, 6},
      {120, 60, 30, 30, 30, 30, 15, 7},
      {140, 70, 35, 35, 35, 35, 17, 8},
      {160, 80, 40, 40, 40, 40, 20, 10},
  };
  if (variation_id < 1 || variation_id > kMlpVariations)
    fail(ErrorCode::InvalidHyperparameter, fmt::format("MLP variation {} is not in 1..13", variation_id));
  return table[static_cast<std::size_t>(variation_id - 1)];
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < W.size(); ++l) n += static_cast<std::size_t>(W[l].size() + b[l].size());
  return n;
}

namespace {

struct Activations {
  std::vector<Eigen::MatrixXd> Z;  // pre-activations per layer
  std::vector<Eigen::MatrixXd> A;  // A[0] is the input, A[l+1] = act(Z[l])
};

void softmax_inplace(Eigen::MatrixXd& Z) {
  for (Eigen::Index c = 0; c < Z.cols(); ++c) {
    const double m = Z.col(c).maxCoeff();
    Z.col(c) = (Z.col(c).array() - m).exp();
    Z.col(c) /= Z.col(c).sum();
  }
}

Activations run(const MlpModel& m, const Eigen::MatrixXd& X) {
  if (X.cols() != m.n_inputs())
    fail(ErrorCode::DimensionMismatch, fmt::format("model expects {} features, got {}", m.n_inputs(), X.cols()));
  Activations act;
  act.A.push_back(X.transpose());
  const std::size_t L = m.W.size();
  for (std::size_t l = 0; l < L; ++l) {
    act.Z.push_back((m.W[l] * act.A.back()).colwise() + m.b[l]);
    Eigen::MatrixXd a = act.Z.back();
    if (l + 1 < L)
      a = a.cwiseMax(0.0);
    else if (m.task == Task::Classification)
      softmax_inplace(a);
    act.A.push_back(std::move(a));
  }
  return act;
}

double loss_from_output(const MlpModel& m, const Eigen::MatrixXd& out, const Eigen::MatrixXd& Zlast,
                        const Eigen::VectorXd& y) {
  const auto n = static_cast<double>(y.size());
  if (m.task == Task::Regression) return 0.5 * (out.row(0).transpose() - y).squaredNorm() / n;
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    // log-softmax from the logits keeps the loss finite for confident outputs.
    const double mx = Zlast.col(i).maxCoeff();
    const double lse = mx + std::log((Zlast.col(i).array() - mx).exp().sum());
    total += lse - Zlast(y(i) == 1.0 ? 1 : 0, i);
  }
  return total / n;
}

std::vector<Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>> relu_masks(const Activations& act) {
  std::vector<Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>> masks;
  for (std::size_t l = 0; l + 1 < act.Z.size(); ++l) masks.push_back(act.Z[l].array() > 0.0);
  return masks;
}

bool same_masks(const std::vector<Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>>& a,
                const std::vector<Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>>& b) {
  for (std::size_t l = 0; l < a.size(); ++l)
    if ((a[l] != b[l]).any()) return false;
  return true;
}

void check_xy(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size())
    fail(ErrorCode::DimensionMismatch, fmt::format("{} rows but {} targets", X.rows(), y.size()));
  if (X.rows() == 0) fail(ErrorCode::EmptyData, "MLP needs at least one row");
}

}  // namespace

Eigen::MatrixXd MlpModel::forward(const Eigen::MatrixXd& X) const { return run(*this, X).A.back(); }

Eigen::VectorXd MlpModel::predict(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd out = forward(X);
  if (task == Task::Classification) return out.row(1).transpose();
  return (out.row(0).transpose().array() * y_sd + y_mean).matrix();
}

Eigen::MatrixXd MlpModel::predict_proba(const Eigen::MatrixXd& X) const {
  if (task != Task::Classification)
    fail(ErrorCode::InvalidHyperparameter, "predict_proba needs a classification model");
  return forward(X).transpose();
}

Eigen::VectorXi MlpModel::predict_label(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd p = predict_proba(X);
  return (p.col(1).array() > p.col(0).array()).cast<int>();
}

MlpModel mlp_init(const std::vector<int>& hidden, Eigen::Index n_inputs, Task task, std::uint64_t seed) {
  if (n_inputs < 1) fail(ErrorCode::EmptyData, "MLP needs at least one input feature");
  for (int w : hidden)
    if (w < 1) fail(ErrorCode::InvalidHyperparameter, "hidden widths must be >= 1");
  MlpModel m;
  m.task = task;
  m.layer_sizes = hidden;
  std::vector<Eigen::Index> sizes{n_inputs};
  for (int w : hidden) sizes.push_back(w);
  sizes.push_back(task == Task::Classification ? 2 : 1);
  Rng rng = make_rng(seed, {0x1417});
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double scale = std::sqrt(2.0 / static_cast<double>(sizes[l]));
    Eigen::MatrixXd W(sizes[l + 1], sizes[l]);
    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = scale * standard_normal(rng);
    m.W.push_back(std::move(W));
    m.b.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
  }
  return m;
}

MlpGradients mlp_gradients(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  check_xy(X, y);
  const Activations act = run(m, X);
  const std::size_t L = m.W.size();
  const auto n = static_cast<double>(y.size());
  MlpGradients g;
  g.loss = loss_from_output(m, act.A.back(), act.Z.back(), y);
  g.dW.resize(L);
  g.db.resize(L);

  Eigen::MatrixXd delta = act.A.back();
  if (m.task == Task::Regression) {
    delta.row(0) -= y.transpose();
  } else {
    for (Eigen::Index i = 0; i < y.size(); ++i) delta(y(i) == 1.0 ? 1 : 0, i) -= 1.0;
  }
  delta /= n;
  for (std::size_t l = L; l-- > 0;) {
    g.dW[l] = delta * act.A[l].transpose();
    g.db[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = m.W[l].transpose() * delta;
      delta = delta.cwiseProduct((act.Z[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

double mlp_loss(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  check_xy(X, y);
  const Activations act = run(m, X);
  return loss_from_output(m, act.A.back(), act.Z.back(), y);
}

MlpModel mlp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int variation_id, Task task,
                 const MlpHyper& hyper) {
  check_xy(X, y);
  if (!(hyper.learning_rate > 0.0)) fail(ErrorCode::InvalidHyperparameter, "learning_rate must be > 0");
  if (hyper.epochs < 1 || hyper.batch_size < 1 || hyper.patience < 1)
    fail(ErrorCode::InvalidHyperparameter, "epochs, batch_size and patience must be >= 1");
  MlpModel m = mlp_init(mlp_variation(variation_id), X.cols(), task, hyper.seed);
  m.variation_id = variation_id;
  m.hyper = hyper;

  Eigen::VectorXd target = y;
  if (task == Task::Regression) {
    m.y_mean = y.mean();
    const double sd = std::sqrt((y.array() - m.y_mean).square().mean());
    m.y_sd = sd > 0.0 ? sd : 1.0;
    target = (y.array() - m.y_mean) / m.y_sd;
  } else {
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (y(i) != 0.0 && y(i) != 1.0) fail(ErrorCode::InvalidRecord, "classification labels must be 0 or 1");
  }

  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const std::size_t L = m.W.size();
  std::vector<Eigen::MatrixXd> mW, vW;
  std::vector<Eigen::VectorXd> mb, vb;
  for (std::size_t l = 0; l < L; ++l) {
    mW.push_back(Eigen::MatrixXd::Zero(m.W[l].rows(), m.W[l].cols()));
    vW.push_back(mW.back());
    mb.push_back(Eigen::VectorXd::Zero(m.b[l].size()));
    vb.push_back(mb.back());
  }

  const auto n = static_cast<std::size_t>(X.rows());
  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  double best = INFINITY;
  int stale = 0;
  long step = 0;
  Eigen::MatrixXd Xb;
  Eigen::VectorXd yb;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    Rng rng = make_rng(hyper.seed, {0x5eed, static_cast<std::uint64_t>(epoch)});
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(hyper.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(hyper.batch_size));
      const auto bs = static_cast<Eigen::Index>(end - start);
      Xb.resize(bs, X.cols());
      yb.resize(bs);
      for (Eigen::Index r = 0; r < bs; ++r) {
        Xb.row(r) = X.row(perm[start + static_cast<std::size_t>(r)]);
        yb(r) = target(perm[start + static_cast<std::size_t>(r)]);
      }
      const MlpGradients g = mlp_gradients(m, Xb, yb);
      if (!std::isfinite(g.loss))
        fail(ErrorCode::DivergedLoss, fmt::format("training loss became non-finite in epoch {}", epoch));
      epoch_loss += g.loss * static_cast<double>(bs);
      ++step;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      const double lr = hyper.learning_rate * std::sqrt(c2) / c1;
      for (std::size_t l = 0; l < L; ++l) {
        mW[l] = beta1 * mW[l] + (1 - beta1) * g.dW[l];
        vW[l] = beta2 * vW[l] + (1 - beta2) * g.dW[l].cwiseAbs2();
        m.W[l].array() -= lr * mW[l].array() / (vW[l].array().sqrt() + eps);
        mb[l] = beta1 * mb[l] + (1 - beta1) * g.db[l];
        vb[l] = beta2 * vb[l] + (1 - beta2) * g.db[l].cwiseAbs2();
        m.b[l].array() -= lr * mb[l].array() / (vb[l].array().sqrt() + eps);
      }
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss))
      fail(ErrorCode::DivergedLoss, fmt::format("training loss became non-finite in epoch {}", epoch));
    m.loss_curve.push_back(epoch_loss);
    if (epoch_loss < best - hyper.tol) {
      best = epoch_loss;
      stale = 0;
    } else if (++stale >= hyper.patience) {
      break;
    }
  }
  return m;
}

MlpModel mlp_downscale(const MlpModel& model, std::size_t max_params, std::uint64_t seed) {
  if (model.parameter_count() <= max_params) return model;
  const Eigen::Index p = model.n_inputs();
  for (double s = 0.98; s > 0.0; s *= 0.98) {
    std::vector<int> widths;
    for (int w : model.layer_sizes) widths.push_back(std::max(1, static_cast<int>(std::floor(w * s))));
    MlpModel small = mlp_init(widths, p, model.task, seed);
    if (small.parameter_count() <= max_params || s < 1e-3) {
      small.variation_id = model.variation_id;
      small.y_mean = model.y_mean;
      small.y_sd = model.y_sd;
      small.hyper = model.hyper;
      return small;
    }
  }
  return model;
}

GradientCheckResult gradient_check(const MlpModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   const GradientTamper& tamper) {
  constexpr double h = 1e-5;
  MlpModel m = mlp_downscale(model, 5000, model.hyper.seed);
  MlpGradients g = mlp_gradients(m, X, y);
  if (tamper) tamper(g);
  const auto base_masks = relu_masks(run(m, X));

  GradientCheckResult res;
  res.parameters = m.parameter_count();
  res.weight_error.assign(m.W.size(), 0.0);
  res.bias_error.assign(m.W.size(), 0.0);

  // Central difference for one scalar parameter; returns false when a ReLU flips.
  auto probe = [&](double& param, double analytic, double& err) {
    const double saved = param;
    param = saved + h;
    const Activations up = run(m, X);
    const bool flip_up = !same_masks(relu_masks(up), base_masks);
    const double lp = loss_from_output(m, up.A.back(), up.Z.back(), y);
    param = saved - h;
    const Activations down = run(m, X);
    const bool flip_down = !same_masks(relu_masks(down), base_masks);
    const double lm = loss_from_output(m, down.A.back(), down.Z.back(), y);
    param = saved;
    if (flip_up || flip_down) {
      ++res.skipped;
      return;
    }
    const double numeric = (lp - lm) / (2.0 * h);
    const double rel = std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), 1e-6);
    err = std::max(err, rel);
    ++res.checked;
  };

  for (std::size_t l = 0; l < m.W.size(); ++l) {
    for (Eigen::Index i = 0; i < m.W[l].size(); ++i) probe(m.W[l].data()[i], g.dW[l].data()[i], res.weight_error[l]);
    for (Eigen::Index i = 0; i < m.b[l].size(); ++i) probe(m.b[l].data()[i], g.db[l].data()[i], res.bias_error[l]);
    res.max_rel_error = std::max({res.max_rel_error, res.weight_error[l], res.bias_error[l]});
  }
  return res;
}

}  // namespace glucolens
