// glucolens command-line front end.
//
// Settings come from built-in defaults, then an optional JSON config file
// (--config), then command-line flags; later sources win. All randomness is
// derived from the single global seed.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "glucolens/artifact.hpp"
#include "glucolens/counterfactuals.hpp"
#include "glucolens/error.hpp"
#include "glucolens/evaluation.hpp"
#include "glucolens/features.hpp"
#include "glucolens/ingest.hpp"
#include "glucolens/io.hpp"
#include "glucolens/llm.hpp"
#include "glucolens/random.hpp"
#include "glucolens/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace glucolens;

namespace {

enum Stage : std::uint64_t { kSynthStage = 1, kExperimentStage = 2, kTrainStage = 3, kExplainStage = 4 };

struct LlmSettings {
  bool live = false;
  std::optional<fs::path> cache;
  std::optional<fs::path> prompt_template;
  int max_retries = 3;
};

struct CliConfig {
  std::uint64_t seed = 0;
  std::optional<fs::path> cohort;
  std::optional<SynthCohortSpec> synth;
  FeatureOptions features;
  TargetConfig targets;
  ExperimentConfig experiment;
  LlmSettings llm;
  CfConfig cf;
  std::set<std::string> immutable = CfConstraints::default_immutable();
  std::optional<fs::path> output;
};

void reject_unknown(const json& j, std::initializer_list<std::string_view> keys, std::string_view where) {
  if (!j.is_object()) fail(ErrorCode::InvalidConfig, fmt::format("'{}' must be an object", where));
  for (const auto& [k, v] : j.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      fail(ErrorCode::InvalidConfig, fmt::format("unknown key '{}' in {}", k, where));
}

void reject_seed(const json& j, std::string_view where) {
  if (j.contains("seed"))
    fail(ErrorCode::InvalidConfig, fmt::format("'{}.seed' is derived from the top-level seed; remove it", where));
}

DayWindow parse_day_window(std::string_view s) {
  if (s == "previous_calendar_day") return DayWindow::PreviousCalendarDay;
  if (s == "midnight_to_lunch") return DayWindow::MidnightToLunch;
  fail(ErrorCode::InvalidConfig, fmt::format("unknown day window '{}'", s));
}

HyperglycemiaPolicy parse_policy(std::string_view s) {
  if (s == "max_in_window") return HyperglycemiaPolicy::MaxInWindow;
  if (s == "at_two_hours") return HyperglycemiaPolicy::AtTwoHours;
  fail(ErrorCode::InvalidConfig, fmt::format("unknown hyperglycemia policy '{}'", s));
}

CliConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidConfig, fmt::format("{}: {}", path.string(), e.what()));
  }
  CliConfig c;
  try {
    reject_unknown(j, {"seed", "cohort", "synth", "features", "experiment", "llm", "counterfactuals", "output"},
                   "config");
    c.seed = j.value("seed", c.seed);
    if (j.contains("cohort")) c.cohort = j.at("cohort").get<std::string>();
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    if (j.contains("synth")) {
      reject_seed(j.at("synth"), "synth");
      c.synth = synth_spec_from_json(j.at("synth"));
    }
    if (j.contains("features")) {
      const auto& f = j.at("features");
      reject_unknown(f, {"day_window", "window_minutes", "max_gap_minutes", "threshold", "hyper_policy"}, "features");
      if (f.contains("day_window")) c.features.day_window = parse_day_window(f.at("day_window").get<std::string>());
      c.targets.window_minutes = f.value("window_minutes", c.targets.window_minutes);
      c.targets.max_gap_minutes = f.value("max_gap_minutes", c.targets.max_gap_minutes);
      c.targets.threshold = f.value("threshold", c.targets.threshold);
      if (f.contains("hyper_policy")) c.targets.policy = parse_policy(f.at("hyper_policy").get<std::string>());
    }
    if (j.contains("experiment")) {
      reject_seed(j.at("experiment"), "experiment");
      c.experiment = experiment_config_from_json(j.at("experiment"));
    }
    if (j.contains("llm")) {
      const auto& l = j.at("llm");
      reject_unknown(l, {"live", "cache", "template", "max_retries"}, "llm");
      c.llm.live = l.value("live", false);
      if (l.contains("cache")) c.llm.cache = l.at("cache").get<std::string>();
      if (l.contains("template")) c.llm.prompt_template = l.at("template").get<std::string>();
      c.llm.max_retries = l.value("max_retries", c.llm.max_retries);
    }
    if (j.contains("counterfactuals")) {
      const auto& f = j.at("counterfactuals");
      reject_unknown(f, {"k", "budget", "proximity_weight", "diversity_weight", "population", "immutable"},
                     "counterfactuals");
      c.cf.k = f.value("k", c.cf.k);
      c.cf.budget = f.value("budget", c.cf.budget);
      c.cf.proximity_weight = f.value("proximity_weight", c.cf.proximity_weight);
      c.cf.diversity_weight = f.value("diversity_weight", c.cf.diversity_weight);
      c.cf.population = f.value("population", c.cf.population);
      if (f.contains("immutable")) c.immutable = f.at("immutable").get<std::set<std::string>>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidConfig, fmt::format("{}: {}", path.string(), e.what()));
  }
  return c;
}

// Flags shared by every subcommand.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, std::string_view out_help) {
  cmd->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Global seed (overrides the config)");
  cmd->add_option("--out", c.out, std::string(out_help));
}

CliConfig resolve(const Common& common) {
  CliConfig c = common.config.empty() ? CliConfig{} : load_config(common.config);
  if (common.seed) c.seed = *common.seed;
  if (c.synth) c.synth->seed = derive_seed(c.seed, {kSynthStage});
  c.experiment.seed = derive_seed(c.seed, {kExperimentStage});
  c.cf.seed = derive_seed(c.seed, {kExplainStage});
  return c;
}

fs::path output_path(const Common& common, const CliConfig& c, std::string_view default_name) {
  if (!common.out.empty()) return common.out;
  if (c.output) return *c.output / default_name;
  fail(ErrorCode::InvalidConfig, "no output path: pass --out or set 'output' in the config");
}

// --- data sources -----------------------------------------------------------

struct Source {
  std::string cohort;
  bool synth = false;
  int participants = 0;
  std::string features;
};

void add_cohort_source(CLI::App* cmd, Source& s) {
  cmd->add_option("--cohort", s.cohort, "Cohort directory")->check(CLI::ExistingDirectory);
  cmd->add_flag("--synth", s.synth, "Use the synthetic cohort from the config's synth spec");
  cmd->add_option("--participants", s.participants, "Synthetic cohort size")->check(CLI::PositiveNumber);
}

void add_feature_source(CLI::App* cmd, Source& s) {
  cmd->add_option("--features", s.features, "Feature matrix CSV (from featurize)");
  add_cohort_source(cmd, s);
}

std::vector<ParticipantData> load_cohort(const Source& s, CliConfig& c) {
  if (!s.cohort.empty()) return read_cohort(s.cohort);
  if (s.synth || (!c.cohort && c.synth)) {
    SynthCohortSpec spec = c.synth.value_or(SynthCohortSpec{});
    spec.seed = derive_seed(c.seed, {kSynthStage});
    if (s.participants > 0) spec.n_participants = s.participants;
    return synth_cohort(spec);
  }
  if (c.cohort) return read_cohort(*c.cohort);
  fail(ErrorCode::InvalidConfig, "no data source: pass --cohort, --synth or --features");
}

// Keeps the columns of `kind`; every set is a subsequence of the wider ones.
LabeledDataset select_features(LabeledDataset ds, FeatureSetKind kind) {
  if (ds.set_kind == kind) return ds;
  const auto& wanted = feature_names(kind);
  Eigen::MatrixXd X(ds.rows(), static_cast<Eigen::Index>(wanted.size()));
  for (std::size_t j = 0; j < wanted.size(); ++j) {
    auto it = std::find(ds.names.begin(), ds.names.end(), wanted[j]);
    if (it == ds.names.end())
      fail(ErrorCode::InvalidConfig, fmt::format("feature matrix ({}) lacks '{}' needed by {}", to_string(ds.set_kind),
                                                 wanted[j], to_string(kind)));
    X.col(static_cast<Eigen::Index>(j)) = ds.X.col(std::distance(ds.names.begin(), it));
  }
  ds.X = std::move(X);
  ds.names = wanted;
  ds.set_kind = kind;
  return ds;
}

LabeledDataset read_features(const fs::path& path) {
  std::istringstream in(read_file(path));
  return read_feature_matrix(in);
}

LabeledDataset load_dataset(const Source& s, CliConfig& c, FeatureSetKind kind) {
  if (!s.features.empty()) return select_features(read_features(s.features), kind);
  return build_dataset(load_cohort(s, c), kind, c.targets, c.features);
}

// --- model names ------------------------------------------------------------

struct ModelFlags {
  std::string model;
  std::optional<int> n_est;
  std::optional<double> alpha;
  std::optional<int> variation;
  std::optional<int> max_leaf;
  std::optional<int> mlp_epochs;
};

void add_model_flags(CLI::App* cmd, ModelFlags& m) {
  cmd->add_option("--model", m.model,
                  "Model: a preset (rf_100, ridge_a0.1, mlp_v5, gbt, rf_100_leaf48, vote_rf_gbt_mlp) or a family "
                  "(rf, ridge, mlp, gbt, vote) refined by the flags below");
  cmd->add_option("--n-est", m.n_est, "Trees for --model rf (10, 50 or 100)");
  cmd->add_option("--alpha", m.alpha, "Penalty for --model ridge (1, 0.1 or 0.01)");
  cmd->add_option("--variation", m.variation, "MLP variation for --model mlp (1-13)");
  cmd->add_option("--max-leaf", m.max_leaf, "Leaf cap for --model rf with 100 trees (24, 48 or 96)");
  cmd->add_option("--mlp-epochs", m.mlp_epochs, "Override MLP epochs")->check(CLI::PositiveNumber);
}

std::string resolve_model(const ModelFlags& m, const std::string& fallback) {
  std::string name = m.model.empty() ? fallback : m.model;
  if (name == "rf") {
    name = fmt::format("rf_{}", m.n_est.value_or(100));
    if (m.max_leaf) name += fmt::format("_leaf{}", *m.max_leaf);
  } else if (name == "ridge") {
    name = fmt::format("ridge_a{:g}", m.alpha.value_or(1.0));
  } else if (name == "mlp") {
    name = fmt::format("mlp_v{}", m.variation.value_or(1));
  } else if (name == "vote") {
    name = "vote_rf_gbt_mlp";
  }
  if (is_vote_model(name))
    vote_preset_of(name);
  else
    find_preset(name);
  return name;
}

// --- commands ---------------------------------------------------------------

void print_cohort_summary(const std::vector<ParticipantData>& cohort) {
  std::size_t samples = 0, events = 0, meals = 0, lunches = 0, flagged = 0, workdays = 0;
  for (const auto& p : cohort) {
    samples += p.cgm().samples().size();
    events += p.activity().events().size();
    meals += p.meals().size();
    workdays += p.workdays().size();
    for (std::size_t i = 0; i < p.meals().size(); ++i) {
      if (p.meals()[i].meal_kind != MealKind::Lunch) continue;
      ++lunches;
      if (p.meal_flagged()[i]) ++flagged;
    }
  }
  fmt::print("participants {}\ncgm samples {}\nactivity events {}\nmeals {} (lunches {}, {} without a workday)\n"
             "workdays {}\n",
             cohort.size(), samples, events, meals, lunches, flagged, workdays);
}

struct Args {
  Common common;
  Source source;
  ModelFlags model;
  std::string feature_set, target, day_window, preset, split, hybrid, llm_cache;
  std::optional<int> seeds, threads, k, target_label;
  std::optional<long> budget;
  bool llm_live = false;
  std::string artifact;
  int row = -1;
};

int cmd_synth(Args& a) {
  CliConfig c = resolve(a.common);
  SynthCohortSpec spec = c.synth.value_or(SynthCohortSpec{});
  spec.seed = derive_seed(c.seed, {kSynthStage});
  if (a.source.participants > 0) spec.n_participants = a.source.participants;
  const auto cohort = synth_cohort(spec);
  const fs::path out = output_path(a.common, c, "cohort");
  write_cohort(out, cohort);
  fmt::print("global seed {}\nwrote {}\n", c.seed, out.string());
  print_cohort_summary(cohort);
  return 0;
}

int cmd_ingest(Args& a) {
  CliConfig c = resolve(a.common);
  const auto cohort = load_cohort(a.source, c);
  const fs::path out = output_path(a.common, c, "cohort");
  write_cohort(out, cohort);
  fmt::print("wrote {}\n", out.string());
  print_cohort_summary(cohort);
  return 0;
}

void apply_feature_flags(Args& a, CliConfig& c) {
  if (!a.feature_set.empty()) c.experiment.feature_set = parse_feature_set(a.feature_set);
  if (!a.target.empty()) c.experiment.target = parse_target(a.target);
  if (!a.day_window.empty()) c.features.day_window = parse_day_window(a.day_window);
}

int cmd_featurize(Args& a) {
  CliConfig c = resolve(a.common);
  apply_feature_flags(a, c);
  BuildStats stats;
  const auto ds = build_dataset(load_cohort(a.source, c), c.experiment.feature_set, c.targets, c.features, &stats);
  std::ostringstream out;
  write_feature_matrix(out, ds);
  const fs::path path = output_path(a.common, c, "features.csv");
  write_file_atomic(path, out.str());
  fmt::print("wrote {}\nfeature set {} ({} features)\nrows {} of {} lunches ({} without a workday, {} skipped)\n",
             path.string(), to_string(ds.set_kind), ds.names.size(), ds.rows(), stats.lunches, stats.flagged,
             stats.skipped);
  return 0;
}

int cmd_train(Args& a) {
  CliConfig c = resolve(a.common);
  apply_feature_flags(a, c);
  const auto ds = load_dataset(a.source, c, c.experiment.feature_set);
  TrainOptions o;
  o.model = resolve_model(a.model, c.experiment.model);
  o.target = c.experiment.target;
  o.mlp_epochs = a.model.mlp_epochs.value_or(c.experiment.mlp_epochs);
  o.adasyn_k = c.experiment.adasyn_k;
  o.adasyn_beta = c.experiment.adasyn_beta;
  o.seed = derive_seed(c.seed, {kTrainStage});
  const auto artifact = train_artifact(ds, o);
  const fs::path path = output_path(a.common, c, "model.json");
  save_artifact(path, artifact);
  fmt::print("global seed {}\ntrained {} on {} rows ({} features, target {})\nwrote {}\n", c.seed, o.model, ds.rows(),
             ds.names.size(), to_string(o.target), path.string());
  return 0;
}

SplitSpec parse_split(std::string_view s) {
  if (s.starts_with("balanced:")) return SplitSpec::balanced(std::stoi(std::string(s.substr(9))));
  try {
    return SplitSpec::fraction(std::stod(std::string(s)));
  } catch (const std::logic_error&) {
    fail(ErrorCode::InvalidConfig, fmt::format("split '{}' is neither a fraction nor balanced:<n>", s));
  }
}

int cmd_evaluate(Args& a) {
  CliConfig c = resolve(a.common);
  apply_feature_flags(a, c);
  ExperimentConfig& e = c.experiment;
  e.model = resolve_model(a.model, e.model);
  if (a.model.mlp_epochs) e.mlp_epochs = *a.model.mlp_epochs;
  if (a.seeds) e.n_seeds = *a.seeds;
  if (a.threads) e.threads = *a.threads;
  if (!a.split.empty()) e.split = parse_split(a.split);
  if (!a.hybrid.empty()) e.hybrid = parse_hybrid_mode(a.hybrid);
  if (a.llm_live) c.llm.live = true;
  if (!a.llm_cache.empty()) c.llm.cache = a.llm_cache;
  if (!a.preset.empty() && a.preset != "size-sweep")
    fail(ErrorCode::InvalidConfig, fmt::format("unknown evaluation preset '{}'", a.preset));
  e.validate();

  const auto ds = load_dataset(a.source, c, e.feature_set);
  std::optional<LlmColumns> llm;
  std::optional<LlmCache> cache;
  if (e.hybrid != HybridMode::GlyBase) {
    if (c.llm.cache) cache.emplace(*c.llm.cache);
    std::vector<FeatureVector> rows;
    for (Eigen::Index i = 0; i < ds.rows(); ++i) rows.push_back(ds.row(i));
    const PromptTemplate tmpl =
        c.llm.prompt_template ? PromptTemplate::load(*c.llm.prompt_template) : PromptTemplate::builtin();
    QueryOptions qo;
    qo.max_retries = c.llm.max_retries;
    llm = collect_llm_predictions(builtin_providers(), required_providers(e), rows, llm_target_for(e.target), tmpl,
                                  cache ? &*cache : nullptr, c.llm.live, qo);
    if (cache) cache->persist();
  }
  const LlmColumns* columns = llm ? &*llm : nullptr;

  json out;
  fmt::print("global seed {}\n", c.seed);
  if (a.preset == "size-sweep") {
    out = json::array();
    for (const auto& r : run_split_sweep(ds, e, columns)) {
      fmt::print("\n{}", render_report(r));
      out.push_back(report_to_json(r));
    }
  } else {
    const auto r = run_experiment(ds, e, {}, columns);
    fmt::print("{}", render_report(r));
    out = report_to_json(r);
  }
  const fs::path path = output_path(a.common, c, "report.json");
  write_file_atomic(path, out.dump(1) + "\n");
  fmt::print("wrote {}\n", path.string());
  return 0;
}

int cmd_predict(Args& a) {
  CliConfig c = resolve(a.common);
  apply_feature_flags(a, c);
  const auto artifact = load_artifact(a.artifact);
  const auto ds = load_dataset(a.source, c, artifact.feature_set);
  const Eigen::VectorXd p = artifact.predict(ds.X);
  std::string text = artifact.task() == Task::Classification ? "row,p_hyper,label\n" : "row,prediction\n";
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (artifact.task() == Task::Classification)
      text += fmt::format("{},{},{}\n", i, p(i), p(i) > 0.5 ? 1 : 0);
    else
      text += fmt::format("{},{}\n", i, p(i));
  }
  const fs::path path = output_path(a.common, c, "predictions.csv");
  write_file_atomic(path, text);
  fmt::print("scored {} rows with {}\nwrote {}\n", p.size(), artifact.model_name, path.string());
  return 0;
}

int cmd_explain(Args& a) {
  CliConfig c = resolve(a.common);
  apply_feature_flags(a, c);
  if (a.k) c.cf.k = *a.k;
  if (a.budget) c.cf.budget = *a.budget;
  const auto artifact = load_artifact(a.artifact);
  if (artifact.task() != Task::Classification)
    fail(ErrorCode::InvalidConfig, "explain needs a classifier trained on the hyper target");
  const auto ds = load_dataset(a.source, c, artifact.feature_set);
  if (a.row < 0 || a.row >= ds.rows())
    fail(ErrorCode::InvalidConfig, fmt::format("row {} is outside 0..{}", a.row, ds.rows() - 1));

  const Eigen::VectorXd instance = ds.X.row(a.row).transpose();
  const ProbaFn model = [&artifact](const Eigen::MatrixXd& X) { return artifact.predict(X); };
  const int predicted = model(instance.transpose())(0) > 0.5 ? 1 : 0;
  const int target = a.target_label.value_or(1 - predicted);
  const auto set = generate_counterfactuals(model, instance, target, artifact.constraints(c.immutable), c.cf);

  fmt::print("global seed {}\nrow {}\n{}", c.seed, a.row, render_diff_report(set));
  json j = counterfactuals_to_json(set);
  j["row"] = a.row;
  j["seed"] = c.seed;
  const fs::path path = output_path(a.common, c, "counterfactuals.json");
  write_file_atomic(path, j.dump(1) + "\n");
  fmt::print("wrote {}\n", path.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glucolens: postprandial glucose response modelling"};
  app.require_subcommand(1);
  Args a;

  auto* synth = app.add_subcommand("synth", "Write a synthetic cohort");
  add_common(synth, a.common, "Cohort directory to write");
  synth->add_option("--participants", a.source.participants, "Cohort size")->check(CLI::PositiveNumber);

  auto* ingest = app.add_subcommand("ingest", "Validate a cohort and write it back in canonical form");
  add_common(ingest, a.common, "Cohort directory to write");
  add_cohort_source(ingest, a.source);

  auto* featurize = app.add_subcommand("featurize", "Build the lunch feature matrix");
  add_common(featurize, a.common, "Feature matrix CSV to write");
  add_cohort_source(featurize, a.source);
  featurize->add_option("--feature-set", a.feature_set, "sensor_gl, sensor_macro, self_gl, self_macro or all");
  featurize->add_option("--day-window", a.day_window, "previous_calendar_day or midnight_to_lunch");

  auto* train = app.add_subcommand("train", "Fit a model on every row and save it");
  add_common(train, a.common, "Model file to write");
  add_feature_source(train, a.source);
  train->add_option("--feature-set", a.feature_set, "Feature set");
  train->add_option("--target", a.target, "auc, iauc, max_bgl or hyper");
  add_model_flags(train, a.model);

  auto* evaluate = app.add_subcommand("evaluate", "Repeated split/fit/score experiment");
  add_common(evaluate, a.common, "Report JSON to write");
  add_feature_source(evaluate, a.source);
  evaluate->add_option("--feature-set", a.feature_set, "Feature set");
  evaluate->add_option("--target", a.target, "auc, iauc, max_bgl or hyper");
  add_model_flags(evaluate, a.model);
  evaluate->add_option("--seeds", a.seeds, "Number of repetitions")->check(CLI::PositiveNumber);
  evaluate->add_option("--split", a.split, "Test fraction (0.2) or balanced:<n per class>");
  evaluate->add_option("--preset", a.preset, "size-sweep runs the six training-size splits");
  evaluate->add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);
  evaluate->add_option("--hybrid", a.hybrid, "gly_base, gly_llm, gly_hybrid, gly_hybrid_v2 or gly_max");
  evaluate->add_flag("--llm-live", a.llm_live, "Query real LLM endpoints (keys from GLUCOLENS_LLM_<PROVIDER>_KEY)");
  evaluate->add_option("--llm-cache", a.llm_cache, "LLM response cache file");

  auto* predict = app.add_subcommand("predict", "Score rows with a saved model");
  add_common(predict, a.common, "Predictions CSV to write");
  add_feature_source(predict, a.source);
  predict->add_option("--model", a.artifact, "Model file from train")->required()->check(CLI::ExistingFile);

  auto* explain = app.add_subcommand("explain", "Counterfactual suggestions for one row");
  add_common(explain, a.common, "Counterfactual JSON to write");
  add_feature_source(explain, a.source);
  explain->add_option("--model", a.artifact, "Classifier file from train")->required()->check(CLI::ExistingFile);
  explain->add_option("--row", a.row, "Row of the feature matrix to explain")->required();
  explain->add_option("--target-label", a.target_label, "Desired label (default: the opposite of the prediction)")
      ->check(CLI::Range(0, 1));
  explain->add_option("--k", a.k, "Number of counterfactuals")->check(CLI::PositiveNumber);
  explain->add_option("--budget", a.budget, "Model evaluations")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) return cmd_synth(a);
    if (*ingest) return cmd_ingest(a);
    if (*featurize) return cmd_featurize(a);
    if (*train) return cmd_train(a);
    if (*evaluate) return cmd_evaluate(a);
    if (*predict) return cmd_predict(a);
    if (*explain) return cmd_explain(a);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_input_error(e.code()) ? 2 : 1;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
