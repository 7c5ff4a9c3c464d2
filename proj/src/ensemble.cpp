#include "glucolens/ensemble.hpp"

#include <algorithm>
#include <exception>
#include <thread>

#include <fmt/format.h>

#include "glucolens/error.hpp"

namespace glucolens {

namespace {

Eigen::Index classifier_inputs(const AnyClassifier& c) {
  return std::visit([](const auto& m) -> Eigen::Index {
    if constexpr (std::is_same_v<std::decay_t<decltype(m)>, MlpModel>)
      return m.n_inputs();
    else
      return m.n_features;
  }, c);
}

Task classifier_task(const AnyClassifier& c) {
  return std::visit([](const auto& m) -> Task {
    if constexpr (std::is_same_v<std::decay_t<decltype(m)>, MlpModel>)
      return m.task;
    else
      return m.params.task;
  }, c);
}

}  // namespace

SoftVoteEnsemble::SoftVoteEnsemble(std::vector<AnyClassifier> members) : members_(std::move(members)) {
  if (members_.empty()) fail(ErrorCode::SchemaMismatch, "an ensemble needs at least one member");
  n_features_ = classifier_inputs(members_.front());
  for (const auto& m : members_) {
    if (classifier_inputs(m) != n_features_)
      fail(ErrorCode::SchemaMismatch,
           fmt::format("members disagree on feature count ({} vs {})", classifier_inputs(m), n_features_));
    if (classifier_task(m) != Task::Classification)
      fail(ErrorCode::SchemaMismatch, "every ensemble member must be a classifier");
  }
}

Eigen::MatrixXd SoftVoteEnsemble::predict_proba(const Eigen::MatrixXd& X) const {
  if (X.cols() != n_features_)
    fail(ErrorCode::SchemaMismatch, fmt::format("ensemble expects {} features, got {}", n_features_, X.cols()));
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(X.rows(), 2);
  for (const auto& m : members_) sum += std::visit([&](const auto& c) { return c.predict_proba(X); }, m);
  return sum / static_cast<double>(members_.size());
}

Eigen::VectorXi SoftVoteEnsemble::predict_label(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd p = predict_proba(X);
  return (p.col(1).array() > p.col(0).array()).cast<int>();
}

const std::vector<std::string>& vote_presets() {
  static const std::vector<std::string> names = {"rf_mlp", "rf_gbt", "gbt_mlp", "rf_gbt_mlp"};
  return names;
}

std::vector<ModelFamily> vote_members(std::string_view preset) {
  if (preset == "rf_mlp") return {ModelFamily::Forest, ModelFamily::Mlp};
  if (preset == "rf_gbt") return {ModelFamily::Forest, ModelFamily::Gbt};
  if (preset == "gbt_mlp") return {ModelFamily::Gbt, ModelFamily::Mlp};
  if (preset == "rf_gbt_mlp") return {ModelFamily::Forest, ModelFamily::Gbt, ModelFamily::Mlp};
  fail(ErrorCode::InvalidConfig, fmt::format("unknown voting preset '{}'", preset));
}

bool is_vote_model(std::string_view name) { return name.starts_with("vote_"); }

std::string_view vote_preset_of(std::string_view name) {
  if (!is_vote_model(name)) fail(ErrorCode::InvalidConfig, fmt::format("'{}' is not a vote model", name));
  const std::string_view preset = name.substr(5);
  vote_members(preset);
  return preset;
}

SoftVoteEnsemble fit_soft_vote(std::string_view preset, const VoteSpecs& specs, const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y, std::uint64_t seed) {
  std::vector<AnyClassifier> members;
  std::uint64_t index = 0;
  for (ModelFamily f : vote_members(preset)) {
    const std::uint64_t s = derive_seed(seed, {index++});
    const ModelSpec& spec = f == ModelFamily::Forest ? specs.forest : f == ModelFamily::Gbt ? specs.gbt : specs.mlp;
    if (spec.family != f) fail(ErrorCode::InvalidConfig, fmt::format("member spec '{}' has the wrong family", spec.name));
    Model m = fit_model(spec, X, y, Task::Classification, s);
    std::visit([&](auto&& c) {
      using T = std::decay_t<decltype(c)>;
      if constexpr (std::is_same_v<T, RidgeModel>)
        fail(ErrorCode::InvalidConfig, "ridge cannot vote");
      else
        members.emplace_back(std::move(c));
    }, std::move(m));
  }
  return SoftVoteEnsemble(std::move(members));
}

std::string_view to_string(HybridMode mode) {
  switch (mode) {
    case HybridMode::GlyBase: return "gly_base";
    case HybridMode::GlyLlm: return "gly_llm";
    case HybridMode::GlyHybrid: return "gly_hybrid";
    case HybridMode::GlyHybridV2: return "gly_hybrid_v2";
    case HybridMode::GlyMax: return "gly_max";
  }
  return "?";
}

HybridMode parse_hybrid_mode(std::string_view name) {
  for (auto m : {HybridMode::GlyBase, HybridMode::GlyLlm, HybridMode::GlyHybrid, HybridMode::GlyHybridV2,
                 HybridMode::GlyMax})
    if (to_string(m) == name) return m;
  fail(ErrorCode::InvalidConfig, fmt::format("unknown hybrid mode '{}'", name));
}

std::vector<std::string> llm_columns(HybridMode mode) {
  switch (mode) {
    case HybridMode::GlyBase: return {};
    case HybridMode::GlyHybrid: return hybrid_providers();
    case HybridMode::GlyLlm:
    case HybridMode::GlyHybridV2:
    case HybridMode::GlyMax: return {best_provider()};
  }
  return {};
}

std::string llm_feature_name(std::string_view provider) { return fmt::format("llm_{}", provider); }

FeatureVector extend_features_with_llm(const FeatureVector& base, std::span<const LlmPrediction> predictions,
                                       HybridMode mode) {
  if (mode == HybridMode::GlyBase) return base;
  auto value_of = [&](const std::string& id) {
    for (const auto& p : predictions)
      if (p.provider_id == id) return p.value;
    fail(ErrorCode::MissingProvider, fmt::format("no prediction from provider '{}'", id));
  };
  FeatureVector out = base;
  if (mode == HybridMode::GlyLlm) {
    out.names.clear();
    out.values.clear();
    for (const auto& p : predictions) {
      out.names.push_back(llm_feature_name(p.provider_id));
      out.values.push_back(p.value);
    }
    if (out.names.empty()) fail(ErrorCode::MissingProvider, "no LLM predictions given");
    return out;
  }
  for (const auto& id : llm_columns(mode)) {
    out.names.push_back(llm_feature_name(id));
    out.values.push_back(value_of(id));
  }
  return out;
}

LlmColumns collect_llm_predictions(const std::vector<ProviderConfig>& providers,
                                   const std::vector<std::string>& provider_ids,
                                   std::span<const FeatureVector> rows, LlmTarget target,
                                   const PromptTemplate& tmpl, LlmCache* cache, bool live,
                                   const QueryOptions& opts) {
  std::vector<std::string> prompts;
  for (const auto& r : rows) prompts.push_back(build_prompt(tmpl, r, target));

  std::vector<Eigen::VectorXd> columns(provider_ids.size());
  std::vector<std::exception_ptr> errors(provider_ids.size());
  {
    std::vector<std::jthread> workers;
    for (std::size_t k = 0; k < provider_ids.size(); ++k)
      workers.emplace_back([&, k] {
        try {
          auto client = make_client(find_provider(provider_ids[k], providers), live);
          Eigen::VectorXd col(static_cast<Eigen::Index>(prompts.size()));
          for (std::size_t i = 0; i < prompts.size(); ++i)
            col(static_cast<Eigen::Index>(i)) = query(*client, prompts[i], cache, opts).value;
          columns[k] = std::move(col);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  LlmColumns out;
  for (std::size_t k = 0; k < provider_ids.size(); ++k) out[provider_ids[k]] = std::move(columns[k]);
  return out;
}

HybridResult run_hybrid_regression(const HybridData& data, const HybridConfig& cfg) {
  if (data.X_train.rows() != data.y_train.size())
    fail(ErrorCode::DimensionMismatch, "training features and targets differ in length");
  if (data.X_train.cols() != data.X_test.cols())
    fail(ErrorCode::SchemaMismatch, "train and test feature counts differ");

  auto column = [&](const LlmColumns& cols, const std::string& id, Eigen::Index rows) -> const Eigen::VectorXd& {
    auto it = cols.find(id);
    if (it == cols.end()) fail(ErrorCode::MissingProvider, fmt::format("no predictions from provider '{}'", id));
    if (it->second.size() != rows)
      fail(ErrorCode::DimensionMismatch, fmt::format("provider '{}' covers {} of {} rows", id, it->second.size(), rows));
    return it->second;
  };

  HybridResult result;
  if (cfg.mode == HybridMode::GlyLlm) {
    result.test_predictions = column(data.llm_test, cfg.llm_provider, data.X_test.rows());
    result.llm_feature_names = {llm_feature_name(cfg.llm_provider)};
    return result;
  }
  if (cfg.backbone.family != ModelFamily::Forest && cfg.backbone.family != ModelFamily::Gbt)
    fail(ErrorCode::InvalidHyperparameter, "hybrid backbones are forest or gbt");

  const auto ids = llm_columns(cfg.mode);
  const Eigen::Index base = data.X_train.cols();
  const auto k = static_cast<Eigen::Index>(ids.size());
  Eigen::MatrixXd Xtr(data.X_train.rows(), base + k), Xte(data.X_test.rows(), base + k);
  Xtr.leftCols(base) = data.X_train;
  Xte.leftCols(base) = data.X_test;
  if (k > 0) {
    Eigen::MatrixXd Ltr(data.X_train.rows(), k), Lte(data.X_test.rows(), k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto& id = ids[static_cast<std::size_t>(j)];
      Ltr.col(j) = column(data.llm_train, id, data.X_train.rows());
      Lte.col(j) = column(data.llm_test, id, data.X_test.rows());
      result.llm_feature_names.push_back(llm_feature_name(id));
    }
    const Scaler scaler = Scaler::fit(Ltr);
    Xtr.rightCols(k) = scaler.transform(Ltr);
    Xte.rightCols(k) = scaler.transform(Lte);
  }

  if (cfg.mode == HybridMode::GlyMax) {
    const TrainingSet augmented = gaussian_augment(TrainingSet::real(std::move(Xtr), data.y_train), cfg.augment);
    result.model = fit_model(cfg.backbone, augmented.X, augmented.y, Task::Regression, cfg.seed);
    result.train_rows = augmented.rows();
  } else {
    result.model = fit_model(cfg.backbone, Xtr, data.y_train, Task::Regression, cfg.seed);
    result.train_rows = Xtr.rows();
  }
  result.test_predictions = predict(*result.model, Xte);
  return result;
}

}  // namespace glucolens
