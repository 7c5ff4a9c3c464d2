#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "glucolens/counterfactuals.hpp"
#include "glucolens/features.hpp"
#include "glucolens/model.hpp"

namespace glucolens {

// A trained model together with everything needed to score raw feature rows:
// the schema, the training scaler and the training feature ranges.
struct TrainedArtifact {
  FeatureSetKind feature_set = FeatureSetKind::All;
  std::vector<std::string> names;
  TargetKind target = TargetKind::Auc;
  std::string model_name;     // preset or "vote_<members>"
  std::vector<Model> models;  // one, or the soft-vote members
  Scaler scaler;
  Eigen::VectorXd min, max, mad;  // raw training ranges
  std::uint64_t seed = 0;

  Task task() const { return target == TargetKind::Hyper ? Task::Classification : Task::Regression; }
  // Regression values, or P(class 1) for classifiers, on raw rows.
  Eigen::VectorXd predict(const Eigen::MatrixXd& X_raw) const;
  CfConstraints constraints(const std::set<std::string>& immutable = CfConstraints::default_immutable(),
                            const std::set<std::string>& integer = CfConstraints::default_integer()) const;
};

struct TrainOptions {
  std::string model = "rf_100";
  TargetKind target = TargetKind::Auc;
  int mlp_epochs = 0;  // preset epochs when 0
  int adasyn_k = 5;
  double adasyn_beta = 1.0;
  std::uint64_t seed = 0;
};

// Fits on every row: scaler on the raw features, ADASYN for the hyper target.
TrainedArtifact train_artifact(const LabeledDataset& data, const TrainOptions& options);

nlohmann::json artifact_to_json(const TrainedArtifact& artifact);
TrainedArtifact artifact_from_json(const nlohmann::json& j);
void save_artifact(const std::filesystem::path& path, const TrainedArtifact& artifact);
TrainedArtifact load_artifact(const std::filesystem::path& path);

}  // namespace glucolens
