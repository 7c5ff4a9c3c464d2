#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "glucolens/ensemble.hpp"
#include "glucolens/features.hpp"
#include "glucolens/model.hpp"
#include "glucolens/resampling.hpp"

namespace glucolens {

// ---------------------------------------------------------------------------
// Splits

enum class SplitKind { Fraction, BalancedCount };

struct SplitSpec {
  SplitKind kind = SplitKind::Fraction;
  double test_fraction = 0.2;
  int n_per_class = 10;

  static SplitSpec fraction(double test_fraction);
  static SplitSpec balanced(int n_per_class);
  // "80/20" for fractions, "balanced-10" for balanced counts.
  std::string label() const;
  void validate() const;
};

struct Split {
  std::vector<Eigen::Index> train;  // ascending
  std::vector<Eigen::Index> test;   // ascending
};

// Fraction mode shuffles all rows and takes round(f*n) (at least one, at most
// n-1) for test. Balanced mode needs 0/1 labels and puts exactly n_per_class
// rows of each class in test.
Split split_rows(Eigen::Index n_rows, std::span<const int> labels, const SplitSpec& spec, std::uint64_t seed);

// The six training-size splits 70/30, 80/20, 87/13 (balanced 10+10), 90/10,
// 95/5 and 99/1.
std::vector<SplitSpec> training_size_splits();

// ---------------------------------------------------------------------------
// Metrics

enum class NrmseNorm { Mean, Range };

double rmse(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);
double nrmse(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred, NrmseNorm norm = NrmseNorm::Mean);

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;  // macro
  double recall = 0.0;     // macro
  double f1 = 0.0;         // macro
};

// Binary labels; a class whose precision or recall has an empty denominator
// scores 0 for that quantity.
ClassificationMetrics classification_metrics(std::span<const int> y_true, std::span<const int> y_pred);

inline const std::vector<double> kDefaultTolerances = {5.0, 10.0, 15.0, 20.0};

// Fraction of cases with |pred - true| / true < t% for each t.
std::vector<double> tolerance_curve(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred,
                                    const std::vector<double>& thresholds_pct = kDefaultTolerances);

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentConfig {
  FeatureSetKind feature_set = FeatureSetKind::All;
  TargetKind target = TargetKind::Auc;
  // A Table-2 or leaf-capped preset name, or "vote_<members>" for a soft-vote
  // classifier such as "vote_rf_gbt_mlp".
  std::string model = "rf_100";
  SplitSpec split;
  int n_seeds = 100;
  std::uint64_t seed = 0;
  bool resplit_per_seed = true;
  bool augment = false;
  double augment_sigma = 0.05;
  int augment_factor = 1;
  int adasyn_k = 5;
  double adasyn_beta = 1.0;
  NrmseNorm normalizer = NrmseNorm::Mean;
  // Overrides the preset epochs for MLP members when positive.
  int mlp_epochs = 0;
  // Regression only. Non-base modes append LLM prediction columns and need
  // the model to be a forest or gbt preset; GlyMax augments with the
  // augment_* settings.
  HybridMode hybrid = HybridMode::GlyBase;
  std::string llm_provider = best_provider();  // GlyLlm only
  int threads = 1;

  Task task() const { return target == TargetKind::Hyper ? Task::Classification : Task::Regression; }
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
// Missing keys keep their defaults; unknown keys raise InvalidConfig.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
// SHA-256 of the canonical JSON form, leaving out the thread count.
std::string config_fingerprint(const ExperimentConfig& config);

struct SeedResult {
  int index = 0;
  std::uint64_t seed = 0;
  std::size_t n_train_real = 0;
  std::size_t n_train_synthetic = 0;
  std::size_t n_train_augmented = 0;
  std::size_t n_test = 0;
  std::map<std::string, double> metrics;
  std::vector<double> tolerance;  // regression only
};

struct MetricsReport {
  Task task = Task::Regression;
  ExperimentConfig config;
  std::string fingerprint;
  std::vector<SeedResult> seeds;
  std::map<std::string, double> mean;
  std::map<std::string, double> sd;
  std::vector<double> tolerance_mean;  // regression only
};

// Called with each seed's fitted training set before the model sees it, and
// the test row indices; lets callers audit the pipeline.
using TrainingAudit = std::function<void(int seed_index, const TrainingSet& train, const Split& split)>;

// For every seed: split, scale on the train rows, balance (classification) or
// augment the training side, fit, predict the real test rows and score. The
// test side is never resampled. Raises std::logic_error if any training row
// originates from a test row.
// Hybrid modes read per-row LLM predictions (raw units) from `llm`.
MetricsReport run_experiment(const LabeledDataset& data, const ExperimentConfig& config,
                             const TrainingAudit& audit = {}, const LlmColumns* llm = nullptr);

// Providers whose predictions a hybrid configuration needs.
std::vector<std::string> required_providers(const ExperimentConfig& config);
LlmTarget llm_target_for(TargetKind target);

// One report per Table-6 split with everything else from `config`.
std::vector<MetricsReport> run_split_sweep(const LabeledDataset& data, const ExperimentConfig& config,
                                           const LlmColumns* llm = nullptr);

nlohmann::json report_to_json(const MetricsReport& report);
std::string render_report(const MetricsReport& report);

}  // namespace glucolens
