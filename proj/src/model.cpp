#include "glucolens/model.hpp"

#include <fmt/format.h>

#include "glucolens/error.hpp"
#include "glucolens/io.hpp"

namespace glucolens {

using nlohmann::json;

std::string_view to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::Ridge: return "ridge";
    case ModelFamily::Forest: return "forest";
    case ModelFamily::Mlp: return "mlp";
    case ModelFamily::Gbt: return "gbt";
  }
  return "?";
}

namespace {

ModelSpec named(std::string name, ModelFamily family) {
  ModelSpec s;
  s.name = std::move(name);
  s.family = family;
  return s;
}

}  // namespace

const std::vector<ModelSpec>& table2_presets() {
  static const std::vector<ModelSpec> presets = [] {
    std::vector<ModelSpec> out;
    for (double a : {1.0, 0.1, 0.01}) {
      ModelSpec s = named(fmt::format("ridge_a{}", a), ModelFamily::Ridge);
      s.alpha = a;
      out.push_back(s);
    }
    for (int n : {10, 50, 100}) {
      ModelSpec s = named(fmt::format("rf_{}", n), ModelFamily::Forest);
      s.forest.n_estimators = n;
      out.push_back(s);
    }
    for (int v = 1; v <= kMlpVariations; ++v) {
      ModelSpec s = named(fmt::format("mlp_v{}", v), ModelFamily::Mlp);
      s.mlp_variation = v;
      out.push_back(s);
    }
    out.push_back(named("gbt", ModelFamily::Gbt));
    return out;
  }();
  return presets;
}

const std::vector<ModelSpec>& leaf_capped_presets() {
  static const std::vector<ModelSpec> presets = [] {
    std::vector<ModelSpec> out;
    for (int cap : {24, 48, 96}) {
      ModelSpec s = named(fmt::format("rf_100_leaf{}", cap), ModelFamily::Forest);
      s.forest.n_estimators = 100;
      s.forest.max_leaf_nodes = cap;
      out.push_back(s);
    }
    return out;
  }();
  return presets;
}

ModelSpec find_preset(std::string_view name) {
  for (const auto* list : {&table2_presets(), &leaf_capped_presets()})
    for (const auto& s : *list)
      if (s.name == name) return s;
  fail(ErrorCode::InvalidConfig, fmt::format("unknown model preset '{}'", name));
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

std::string_view model_kind(const Model& model) {
  return std::visit(overloaded{[](const RidgeModel&) { return std::string_view("ridge"); },
                               [](const ForestModel&) { return std::string_view("forest"); },
                               [](const GbtModel&) { return std::string_view("gbt"); },
                               [](const MlpModel&) { return std::string_view("mlp"); }},
                    model);
}

Eigen::Index model_inputs(const Model& model) {
  return std::visit(overloaded{[](const RidgeModel& m) { return m.weights.size(); },
                               [](const ForestModel& m) { return m.n_features; },
                               [](const GbtModel& m) { return m.n_features; },
                               [](const MlpModel& m) { return m.n_inputs(); }},
                    model);
}

Task model_task(const Model& model) {
  return std::visit(overloaded{[](const RidgeModel&) { return Task::Regression; },
                               [](const ForestModel& m) { return m.params.task; },
                               [](const GbtModel& m) { return m.params.task; },
                               [](const MlpModel& m) { return m.task; }},
                    model);
}

Model fit_model(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Task task,
                std::uint64_t seed) {
  switch (spec.family) {
    case ModelFamily::Ridge:
      if (task != Task::Regression)
        fail(ErrorCode::InvalidHyperparameter, "ridge models only support regression");
      return ridge_fit(X, y, spec.alpha);
    case ModelFamily::Forest: {
      ForestParams p = spec.forest;
      p.task = task;
      p.seed = seed;
      return forest_fit(X, y, p);
    }
    case ModelFamily::Mlp: {
      MlpHyper h = spec.mlp;
      h.seed = seed;
      return mlp_fit(X, y, spec.mlp_variation, task, h);
    }
    case ModelFamily::Gbt: {
      GbtParams p = spec.gbt;
      p.task = task;
      p.seed = seed;
      return gbt_fit(X, y, p);
    }
  }
  fail(ErrorCode::InvalidConfig, "unknown model family");
}

Eigen::VectorXd predict(const Model& model, const Eigen::MatrixXd& X) {
  return std::visit([&](const auto& m) -> Eigen::VectorXd { return m.predict(X); }, model);
}

Eigen::MatrixXd predict_proba(const Model& model, const Eigen::MatrixXd& X) {
  return std::visit(overloaded{[](const RidgeModel&) -> Eigen::MatrixXd {
                                 fail(ErrorCode::InvalidHyperparameter, "ridge models have no probabilities");
                               },
                               [&](const auto& m) -> Eigen::MatrixXd { return m.predict_proba(X); }},
                    model);
}

// ---- serialization ----

namespace {

std::string_view task_name(Task t) { return t == Task::Regression ? "regression" : "classification"; }

Task parse_task(const std::string& s) {
  if (s == "regression") return Task::Regression;
  if (s == "classification") return Task::Classification;
  fail(ErrorCode::InvalidConfig, fmt::format("unknown task '{}'", s));
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mat_json(const Eigen::MatrixXd& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};  // column-major
}

Eigen::MatrixXd mat_from(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    fail(ErrorCode::InvalidConfig, "matrix data length does not match its shape");
  return Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols);
}

json tree_json(const Tree& t) {
  std::vector<int> feature, left, right;
  std::vector<double> threshold, value;
  for (const auto& n : t.nodes()) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}};
}

Tree tree_from(const json& j) {
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto value = j.at("value").get<std::vector<double>>();
  const std::size_t n = feature.size();
  if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n)
    fail(ErrorCode::InvalidConfig, "tree arrays differ in length");
  std::vector<TreeNode> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i]};
  return Tree(std::move(nodes));
}

json trees_json(const std::vector<Tree>& trees) {
  json arr = json::array();
  for (const auto& t : trees) arr.push_back(tree_json(t));
  return arr;
}

std::vector<Tree> trees_from(const json& j) {
  std::vector<Tree> out;
  for (const auto& t : j) out.push_back(tree_from(t));
  return out;
}

json params_json(const Model& model) {
  return std::visit(
      overloaded{
          [](const RidgeModel& m) -> json {
            return {{"hyper", {{"alpha", m.alpha}}},
                    {"params", {{"weights", vec_json(m.weights)}, {"intercept", m.intercept}}}};
          },
          [](const ForestModel& m) -> json {
            return {{"hyper",
                     {{"n_estimators", m.params.n_estimators},
                      {"max_leaf_nodes", m.params.max_leaf_nodes},
                      {"task", task_name(m.params.task)},
                      {"seed", m.params.seed}}},
                    {"params", {{"n_features", m.n_features}, {"trees", trees_json(m.trees)}}}};
          },
          [](const GbtModel& m) -> json {
            const auto& p = m.params;
            return {{"hyper",
                     {{"n_rounds", p.n_rounds},
                      {"learning_rate", p.learning_rate},
                      {"max_depth", p.max_depth},
                      {"l2_leaf_penalty", p.l2_leaf_penalty},
                      {"min_child_weight", p.min_child_weight},
                      {"colsample", p.colsample},
                      {"task", task_name(p.task)},
                      {"seed", p.seed}}},
                    {"params",
                     {{"n_features", m.n_features}, {"base_score", m.base_score}, {"trees", trees_json(m.trees)}}}};
          },
          [](const MlpModel& m) -> json {
            const auto& h = m.hyper;
            json W = json::array(), b = json::array();
            for (std::size_t l = 0; l < m.W.size(); ++l) {
              W.push_back(mat_json(m.W[l]));
              b.push_back(vec_json(m.b[l]));
            }
            return {{"hyper",
                     {{"variation_id", m.variation_id},
                      {"layer_sizes", m.layer_sizes},
                      {"task", task_name(m.task)},
                      {"learning_rate", h.learning_rate},
                      {"epochs", h.epochs},
                      {"batch_size", h.batch_size},
                      {"patience", h.patience},
                      {"tol", h.tol},
                      {"seed", h.seed}}},
                    {"params",
                     {{"W", W}, {"b", b}, {"y_mean", m.y_mean}, {"y_sd", m.y_sd}, {"loss_curve", m.loss_curve}}}};
          }},
      model);
}

}  // namespace

json model_to_json(const Model& model) {
  json j = params_json(model);
  j["format"] = "glucolens-model";
  j["version"] = kModelFormatVersion;
  j["kind"] = model_kind(model);
  return j;
}

Model model_from_json(const json& j) {
  try {
    if (j.at("format") != "glucolens-model") fail(ErrorCode::InvalidConfig, "not a model file");
    if (j.at("version") != kModelFormatVersion)
      fail(ErrorCode::InvalidConfig, fmt::format("unsupported model version {}", j.at("version").dump()));
    const auto kind = j.at("kind").get<std::string>();
    const json& h = j.at("hyper");
    const json& p = j.at("params");
    if (kind == "ridge") {
      return RidgeModel{vec_from(p.at("weights")), p.at("intercept").get<double>(), h.at("alpha").get<double>()};
    }
    if (kind == "forest") {
      ForestModel m;
      m.params.n_estimators = h.at("n_estimators");
      m.params.max_leaf_nodes = h.at("max_leaf_nodes");
      m.params.task = parse_task(h.at("task"));
      m.params.seed = h.at("seed");
      m.n_features = p.at("n_features");
      m.trees = trees_from(p.at("trees"));
      return m;
    }
    if (kind == "gbt") {
      GbtModel m;
      m.params.n_rounds = h.at("n_rounds");
      m.params.learning_rate = h.at("learning_rate");
      m.params.max_depth = h.at("max_depth");
      m.params.l2_leaf_penalty = h.at("l2_leaf_penalty");
      m.params.min_child_weight = h.at("min_child_weight");
      m.params.colsample = h.at("colsample");
      m.params.task = parse_task(h.at("task"));
      m.params.seed = h.at("seed");
      m.n_features = p.at("n_features");
      m.base_score = p.at("base_score");
      m.trees = trees_from(p.at("trees"));
      return m;
    }
    if (kind == "mlp") {
      MlpModel m;
      m.variation_id = h.at("variation_id");
      m.layer_sizes = h.at("layer_sizes").get<std::vector<int>>();
      m.task = parse_task(h.at("task"));
      m.hyper.learning_rate = h.at("learning_rate");
      m.hyper.epochs = h.at("epochs");
      m.hyper.batch_size = h.at("batch_size");
      m.hyper.patience = h.at("patience");
      m.hyper.tol = h.at("tol");
      m.hyper.seed = h.at("seed");
      for (const auto& w : p.at("W")) m.W.push_back(mat_from(w));
      for (const auto& v : p.at("b")) m.b.push_back(vec_from(v));
      m.y_mean = p.at("y_mean");
      m.y_sd = p.at("y_sd");
      m.loss_curve = p.at("loss_curve").get<std::vector<double>>();
      if (m.W.size() != m.b.size() || m.W.size() != m.layer_sizes.size() + 1)
        fail(ErrorCode::InvalidConfig, "MLP layer arrays are inconsistent");
      return m;
    }
    fail(ErrorCode::InvalidConfig, fmt::format("unknown model kind '{}'", kind));
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidConfig, fmt::format("malformed model: {}", e.what()));
  }
}

void save_model(const std::filesystem::path& path, const Model& model) {
  write_file_atomic(path, model_to_json(model).dump() + "\n");
}

Model load_model(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::InvalidConfig, fmt::format("{}: {}", path.string(), e.what()));
  }
  return model_from_json(j);
}

}  // namespace glucolens
