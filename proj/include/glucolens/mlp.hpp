#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "glucolens/tree.hpp"

namespace glucolens {

// Hidden widths of the 13 MLP variations, indexed by variation id 1..13.
const std::vector<int>& mlp_variation(int variation_id);
constexpr int kMlpVariations = 13;

struct MlpHyper {
  double learning_rate = 1e-3;
  int epochs = 500;
  int batch_size = 32;
  int patience = 50;   // stop after this many epochs without improvement
  double tol = 1e-4;   // minimum loss decrease that counts as improvement
  std::uint64_t seed = 0;
};

struct MlpModel {
  int variation_id = 0;  // 0 for custom widths
  Task task = Task::Regression;
  std::vector<int> layer_sizes;   // hidden widths
  std::vector<Eigen::MatrixXd> W;  // W[l] is (out x in)
  std::vector<Eigen::VectorXd> b;
  // Regression targets are trained in standardized units.
  double y_mean = 0.0;
  double y_sd = 1.0;
  MlpHyper hyper;
  std::vector<double> loss_curve;  // mean training loss per epoch

  Eigen::Index n_inputs() const { return W.empty() ? 0 : W.front().cols(); }
  std::size_t parameter_count() const;

  // Network output in training units: (1 x n) for regression, (2 x n) softmax
  // probabilities for classification.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const;
  Eigen::VectorXi predict_label(const Eigen::MatrixXd& X) const;
};

// Untrained network with fan-in scaled (He) initial weights and zero biases.
MlpModel mlp_init(const std::vector<int>& hidden, Eigen::Index n_inputs, Task task, std::uint64_t seed);

// Adam on mini-batches; squared error for regression, cross-entropy for
// classification. Raises DivergedLoss when the loss stops being finite.
MlpModel mlp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int variation_id, Task task,
                 const MlpHyper& hyper);

struct MlpGradients {
  double loss = 0.0;
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;
};

// Loss and its gradient for targets in network units (standardized values for
// regression, 0/1 labels for classification). Regression loss is half the mean
// squared error.
MlpGradients mlp_gradients(const MlpModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Copy with hidden widths shrunk proportionally (and weights re-drawn) so the
// parameter count is at most `max_params`. Returned unchanged when it already fits.
MlpModel mlp_downscale(const MlpModel& model, std::size_t max_params, std::uint64_t seed);

struct GradientCheckResult {
  double max_rel_error = 0.0;
  std::vector<double> weight_error;  // per layer
  std::vector<double> bias_error;
  std::size_t checked = 0;
  // Parameters whose ±h perturbation flips a ReLU; the loss is not smooth there.
  std::size_t skipped = 0;
  std::size_t parameters = 0;
};

using GradientTamper = std::function<void(MlpGradients&)>;

// Backprop against central differences (h = 1e-5) on every parameter of a
// copy down-scaled to at most 5000 parameters. The relative error of one
// parameter is |a - n| / max(|a| + |n|, 1e-6). `tamper` may modify the analytic
// gradient before comparison, which lets the harness test itself.
GradientCheckResult gradient_check(const MlpModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   const GradientTamper& tamper = {});

}  // namespace glucolens
