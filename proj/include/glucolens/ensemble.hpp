#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "glucolens/features.hpp"
#include "glucolens/llm.hpp"
#include "glucolens/model.hpp"
#include "glucolens/resampling.hpp"

namespace glucolens {

using AnyClassifier = std::variant<ForestModel, GbtModel, MlpModel>;

// Unweighted soft voting over binary classifiers sharing one feature schema.
class SoftVoteEnsemble {
 public:
  explicit SoftVoteEnsemble(std::vector<AnyClassifier> members);

  // Mean of member probabilities; columns are P(class 0), P(class 1).
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const;
  // Argmax with ties going to class 0.
  Eigen::VectorXi predict_label(const Eigen::MatrixXd& X) const;

  const std::vector<AnyClassifier>& members() const { return members_; }
  Eigen::Index n_features() const { return n_features_; }

 private:
  std::vector<AnyClassifier> members_;
  Eigen::Index n_features_ = 0;
};

// Named member combinations: "rf_mlp", "rf_gbt", "gbt_mlp", "rf_gbt_mlp".
const std::vector<std::string>& vote_presets();
std::vector<ModelFamily> vote_members(std::string_view preset);

// Model names of the form "vote_<preset>", such as "vote_rf_gbt_mlp".
bool is_vote_model(std::string_view model_name);
// The member preset of a vote model name; InvalidConfig for unknown presets.
std::string_view vote_preset_of(std::string_view model_name);

struct VoteSpecs {
  ModelSpec forest = find_preset("rf_100");
  ModelSpec gbt = find_preset("gbt");
  ModelSpec mlp = find_preset("mlp_v1");
};

// Fits each member on (X, y) with seeds derived from (seed, member index).
SoftVoteEnsemble fit_soft_vote(std::string_view preset, const VoteSpecs& specs, const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y, std::uint64_t seed);

enum class HybridMode { GlyBase, GlyLlm, GlyHybrid, GlyHybridV2, GlyMax };
std::string_view to_string(HybridMode mode);
HybridMode parse_hybrid_mode(std::string_view name);

// Providers whose predictions the mode appends, in column order.
std::vector<std::string> llm_columns(HybridMode mode);
std::string llm_feature_name(std::string_view provider);

// Appends `llm_<provider>` columns for the mode. GlyBase returns `base`;
// GlyLlm drops the base features and keeps only the LLM columns given.
FeatureVector extend_features_with_llm(const FeatureVector& base, std::span<const LlmPrediction> predictions,
                                       HybridMode mode);

// One prediction per row per provider, keyed by provider id.
using LlmColumns = std::map<std::string, Eigen::VectorXd>;

// Queries each provider for every row (raw, unscaled features). Providers run
// concurrently; the cache is shared.
LlmColumns collect_llm_predictions(const std::vector<ProviderConfig>& providers,
                                   const std::vector<std::string>& provider_ids,
                                   std::span<const FeatureVector> rows, LlmTarget target,
                                   const PromptTemplate& tmpl, LlmCache* cache, bool live,
                                   const QueryOptions& opts = {});

struct HybridData {
  // Base features, already standardized with a scaler fit on the train rows.
  Eigen::MatrixXd X_train, X_test;
  Eigen::VectorXd y_train;
  LlmColumns llm_train, llm_test;
};

struct HybridConfig {
  HybridMode mode = HybridMode::GlyBase;
  ModelSpec backbone = find_preset("rf_100");  // forest or gbt
  AugmentConfig augment;                       // GlyMax only
  std::string llm_provider = best_provider();  // GlyLlm only
  std::uint64_t seed = 0;
};

struct HybridResult {
  std::optional<Model> model;  // empty for GlyLlm
  Eigen::VectorXd test_predictions;
  Eigen::Index train_rows = 0;  // rows the backbone saw, after any augmentation
  std::vector<std::string> llm_feature_names;
};

// LLM columns are standardized with a scaler fit on the training rows before
// being appended. Raises MissingProvider when a required column is absent.
HybridResult run_hybrid_regression(const HybridData& data, const HybridConfig& cfg);

}  // namespace glucolens
