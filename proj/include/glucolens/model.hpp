#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "glucolens/forest.hpp"
#include "glucolens/gbt.hpp"
#include "glucolens/mlp.hpp"
#include "glucolens/ridge.hpp"

namespace glucolens {

enum class ModelFamily { Ridge, Forest, Mlp, Gbt };
std::string_view to_string(ModelFamily family);

// A named, fully specified backbone configuration.
struct ModelSpec {
  std::string name;
  ModelFamily family = ModelFamily::Forest;
  double alpha = 1.0;
  ForestParams forest;
  int mlp_variation = 1;
  MlpHyper mlp;
  GbtParams gbt;
};

// The replication grid: ridge alpha in {1, 0.1, 0.01}, forests with 10, 50 and
// 100 trees, the 13 MLP variations and one boosted-tree model. Names look like
// "ridge_a0.1", "rf_50", "mlp_v13", "gbt".
const std::vector<ModelSpec>& table2_presets();
// 100-tree forests capped at 24, 48 and 96 leaves ("rf_100_leaf24", ...).
const std::vector<ModelSpec>& leaf_capped_presets();
// Looks a name up in both lists; InvalidConfig when absent.
ModelSpec find_preset(std::string_view name);

using Model = std::variant<RidgeModel, ForestModel, GbtModel, MlpModel>;

std::string_view model_kind(const Model& model);
Eigen::Index model_inputs(const Model& model);
Task model_task(const Model& model);

// Seeds in the spec are replaced by `seed`, so one spec can be refit per run.
Model fit_model(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Task task,
                std::uint64_t seed);
// Regression values, or P(class 1) for classifiers.
Eigen::VectorXd predict(const Model& model, const Eigen::MatrixXd& X);
Eigen::MatrixXd predict_proba(const Model& model, const Eigen::MatrixXd& X);

constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

}  // namespace glucolens
