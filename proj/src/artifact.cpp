#include "glucolens/artifact.hpp"

#include <fmt/format.h>

#include "glucolens/ensemble.hpp"
#include "glucolens/error.hpp"
#include "glucolens/io.hpp"
#include "glucolens/random.hpp"
#include "glucolens/resampling.hpp"

namespace glucolens {

namespace {

constexpr int kArtifactVersion = 1;

SoftVoteEnsemble as_ensemble(const std::vector<Model>& models) {
  std::vector<AnyClassifier> members;
  for (const auto& m : models) {
    std::visit([&](const auto& c) {
      using T = std::decay_t<decltype(c)>;
      if constexpr (std::is_same_v<T, RidgeModel>)
        fail(ErrorCode::SchemaMismatch, "ridge cannot vote");
      else
        members.emplace_back(c);
    }, m);
  }
  return SoftVoteEnsemble(std::move(members));
}

Model as_model(const AnyClassifier& c) {
  return std::visit([](const auto& m) -> Model { return m; }, c);
}

nlohmann::json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec(const nlohmann::json& j, std::size_t expected, const char* what) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != expected)
    fail(ErrorCode::InvalidConfig, fmt::format("artifact {} has {} entries, expected {}", what, v.size(), expected));
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Eigen::VectorXd TrainedArtifact::predict(const Eigen::MatrixXd& X_raw) const {
  if (X_raw.cols() != static_cast<Eigen::Index>(names.size()))
    fail(ErrorCode::SchemaMismatch, fmt::format("model expects {} features, got {}", names.size(), X_raw.cols()));
  const Eigen::MatrixXd Z = scaler.transform(X_raw);
  if (is_vote_model(model_name)) return as_ensemble(models).predict_proba(Z).col(1);
  return glucolens::predict(models.front(), Z);
}

CfConstraints TrainedArtifact::constraints(const std::set<std::string>& immutable,
                                           const std::set<std::string>& integer) const {
  // Rebuild from the stored ranges via a two-row matrix, then restore the MADs.
  Eigen::MatrixXd bounds(2, min.size());
  bounds.row(0) = min.transpose();
  bounds.row(1) = max.transpose();
  CfConstraints c = CfConstraints::from_training(names, bounds, immutable, integer);
  c.mad = mad;
  return c;
}

TrainedArtifact train_artifact(const LabeledDataset& data, const TrainOptions& o) {
  if (data.rows() < 2) fail(ErrorCode::EmptyDataset, "training needs at least two rows");
  TrainedArtifact a;
  a.feature_set = data.set_kind;
  a.names = data.names;
  a.target = o.target;
  a.model_name = o.model;
  a.seed = o.seed;

  const auto ranges = CfConstraints::from_training(data.names, data.X, {}, {});
  a.min = ranges.min;
  a.max = ranges.max;
  a.mad = ranges.mad;

  a.scaler = Scaler::fit(data.X);
  TrainingSet train = TrainingSet::real(a.scaler.transform(data.X), data.target(o.target));
  if (a.task() == Task::Classification) {
    AdasynConfig ac;
    ac.k_neighbors = o.adasyn_k;
    ac.beta = o.adasyn_beta;
    ac.seed = derive_seed(o.seed, {2});
    train = adasyn_balance(train, ac);
  }

  const std::uint64_t fit_seed = derive_seed(o.seed, {4});
  if (is_vote_model(o.model)) {
    if (a.task() != Task::Classification) fail(ErrorCode::InvalidConfig, "soft voting needs the hyper target");
    VoteSpecs specs;
    if (o.mlp_epochs > 0) specs.mlp.mlp.epochs = o.mlp_epochs;
    const auto ensemble = fit_soft_vote(vote_preset_of(o.model), specs, train.X, train.y, fit_seed);
    for (const auto& m : ensemble.members()) a.models.push_back(as_model(m));
  } else {
    ModelSpec spec = find_preset(o.model);
    if (o.mlp_epochs > 0) spec.mlp.epochs = o.mlp_epochs;
    if (spec.family == ModelFamily::Ridge && a.task() == Task::Classification)
      fail(ErrorCode::InvalidConfig, "ridge is a regression model");
    a.models.push_back(fit_model(spec, train.X, train.y, a.task(), fit_seed));
  }
  return a;
}

nlohmann::json artifact_to_json(const TrainedArtifact& a) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : a.models) models.push_back(model_to_json(m));
  return {{"format", "glucolens-artifact"},
          {"version", kArtifactVersion},
          {"feature_set", to_string(a.feature_set)},
          {"names", a.names},
          {"target", to_string(a.target)},
          {"model", a.model_name},
          {"seed", a.seed},
          {"scaler", {{"mean", vec(a.scaler.mean())}, {"sd", vec(a.scaler.sd())}}},
          {"ranges", {{"min", vec(a.min)}, {"max", vec(a.max)}, {"mad", vec(a.mad)}}},
          {"models", models}};
}

TrainedArtifact artifact_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "glucolens-artifact") fail(ErrorCode::InvalidConfig, "not a glucolens model artifact");
    if (j.at("version") != kArtifactVersion)
      fail(ErrorCode::InvalidConfig, fmt::format("unsupported artifact version {}", j.at("version").dump()));
    TrainedArtifact a;
    a.feature_set = parse_feature_set(j.at("feature_set").get<std::string>());
    a.names = j.at("names").get<std::vector<std::string>>();
    if (a.names != feature_names(a.feature_set))
      fail(ErrorCode::InvalidConfig, "artifact feature names do not match its feature set");
    a.target = parse_target(j.at("target").get<std::string>());
    a.model_name = j.at("model").get<std::string>();
    a.seed = j.at("seed").get<std::uint64_t>();
    const std::size_t p = a.names.size();
    a.scaler = Scaler(vec(j.at("scaler").at("mean"), p, "scaler mean"), vec(j.at("scaler").at("sd"), p, "scaler sd"));
    a.min = vec(j.at("ranges").at("min"), p, "min");
    a.max = vec(j.at("ranges").at("max"), p, "max");
    a.mad = vec(j.at("ranges").at("mad"), p, "mad");
    for (const auto& m : j.at("models")) a.models.push_back(model_from_json(m));
    const std::size_t expected = is_vote_model(a.model_name) ? vote_members(vote_preset_of(a.model_name)).size() : 1;
    if (a.models.size() != expected)
      fail(ErrorCode::InvalidConfig, fmt::format("artifact holds {} models, expected {}", a.models.size(), expected));
    for (const auto& m : a.models) {
      if (model_inputs(m) != static_cast<Eigen::Index>(p))
        fail(ErrorCode::InvalidConfig, "artifact model width differs from its feature names");
      if (model_task(m) != a.task()) fail(ErrorCode::InvalidConfig, "artifact model task differs from its target");
    }
    return a;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig, fmt::format("malformed model artifact: {}", e.what()));
  }
}

void save_artifact(const std::filesystem::path& path, const TrainedArtifact& a) {
  write_file_atomic(path, artifact_to_json(a).dump(1) + "\n");
}

TrainedArtifact load_artifact(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig, fmt::format("{}: {}", path.string(), e.what()));
  }
  return artifact_from_json(j);
}

}  // namespace glucolens
