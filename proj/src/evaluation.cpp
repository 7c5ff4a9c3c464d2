#include "glucolens/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "glucolens/error.hpp"
#include "glucolens/llm.hpp"
#include "glucolens/random.hpp"

namespace glucolens {

// ---------------------------------------------------------------------------
// Splits

SplitSpec SplitSpec::fraction(double f) {
  SplitSpec s;
  s.kind = SplitKind::Fraction;
  s.test_fraction = f;
  s.validate();
  return s;
}

SplitSpec SplitSpec::balanced(int n) {
  SplitSpec s;
  s.kind = SplitKind::BalancedCount;
  s.n_per_class = n;
  s.validate();
  return s;
}

std::string SplitSpec::label() const {
  if (kind == SplitKind::BalancedCount) return fmt::format("{}+{}", n_per_class, n_per_class);
  const double test = 100.0 * test_fraction;
  return fmt::format("{:g}/{:g}", 100.0 - test, test);
}

void SplitSpec::validate() const {
  if (kind == SplitKind::Fraction && !(test_fraction > 0.0 && test_fraction < 1.0))
    fail(ErrorCode::InvalidConfig, fmt::format("test fraction {} is outside (0, 1)", test_fraction));
  if (kind == SplitKind::BalancedCount && n_per_class < 1)
    fail(ErrorCode::InvalidConfig, "n_per_class must be >= 1");
}

namespace {

void shuffle(std::vector<Eigen::Index>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

}  // namespace

Split split_rows(Eigen::Index n_rows, std::span<const int> labels, const SplitSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng = make_rng(seed, {0x5b1});
  Split out;
  if (spec.kind == SplitKind::Fraction) {
    if (n_rows < 2) fail(ErrorCode::EmptyDataset, "a split needs at least two rows");
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n_rows));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    shuffle(idx, rng);
    const auto n_test = std::clamp<Eigen::Index>(std::llround(spec.test_fraction * static_cast<double>(n_rows)), 1,
                                                 n_rows - 1);
    out.test.assign(idx.begin(), idx.begin() + n_test);
    out.train.assign(idx.begin() + n_test, idx.end());
  } else {
    if (static_cast<Eigen::Index>(labels.size()) != n_rows)
      fail(ErrorCode::DimensionMismatch, "balanced split needs one label per row");
    std::vector<Eigen::Index> by_class[2];
    for (Eigen::Index i = 0; i < n_rows; ++i) {
      const int l = labels[static_cast<std::size_t>(i)];
      if (l != 0 && l != 1) fail(ErrorCode::InvalidRecord, "balanced split needs 0/1 labels");
      by_class[l].push_back(i);
    }
    for (int c = 0; c < 2; ++c) {
      if (static_cast<int>(by_class[c].size()) < spec.n_per_class)
        fail(ErrorCode::InsufficientClassCount,
             fmt::format("class {} has {} rows, {} needed for the test set", c, by_class[c].size(), spec.n_per_class));
      shuffle(by_class[c], rng);
      out.test.insert(out.test.end(), by_class[c].begin(), by_class[c].begin() + spec.n_per_class);
      out.train.insert(out.train.end(), by_class[c].begin() + spec.n_per_class, by_class[c].end());
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<SplitSpec> training_size_splits() {
  return {SplitSpec::fraction(0.30), SplitSpec::fraction(0.20), SplitSpec::balanced(10),
          SplitSpec::fraction(0.10), SplitSpec::fraction(0.05), SplitSpec::fraction(0.01)};
}

// ---------------------------------------------------------------------------
// Metrics

namespace {

void check_pair(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() == 0) fail(ErrorCode::EmptyData, "metrics need at least one case");
  if (a.size() != b.size())
    fail(ErrorCode::DimensionMismatch, fmt::format("{} truths but {} predictions", a.size(), b.size()));
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

double rmse(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  check_pair(y_true, y_pred);
  return std::sqrt((y_true - y_pred).squaredNorm() / static_cast<double>(y_true.size()));
}

double nrmse(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred, NrmseNorm norm) {
  check_pair(y_true, y_pred);
  double scale = 0.0;
  if (norm == NrmseNorm::Mean) {
    scale = y_true.mean();
    if (!(scale > 0.0)) fail(ErrorCode::ZeroMeanTarget, fmt::format("target mean {} is not positive", scale));
  } else {
    scale = y_true.maxCoeff() - y_true.minCoeff();
    if (!(scale > 0.0)) fail(ErrorCode::ZeroMeanTarget, "target range is zero");
  }
  return rmse(y_true, y_pred) / scale;
}

ClassificationMetrics classification_metrics(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.empty()) fail(ErrorCode::EmptyData, "metrics need at least one case");
  if (y_true.size() != y_pred.size()) fail(ErrorCode::DimensionMismatch, "label vectors differ in length");
  double cm[2][2] = {{0, 0}, {0, 0}};  // [truth][prediction]
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) fail(ErrorCode::InvalidRecord, "labels must be 0 or 1");
    cm[t][p] += 1.0;
  }
  ClassificationMetrics m;
  m.accuracy = (cm[0][0] + cm[1][1]) / static_cast<double>(y_true.size());
  for (int c = 0; c < 2; ++c) {
    const double tp = cm[c][c];
    const double precision = ratio(tp, cm[0][c] + cm[1][c]);
    const double recall = ratio(tp, cm[c][0] + cm[c][1]);
    m.precision += precision / 2.0;
    m.recall += recall / 2.0;
    m.f1 += ratio(2.0 * precision * recall, precision + recall) / 2.0;
  }
  return m;
}

std::vector<double> tolerance_curve(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred,
                                    const std::vector<double>& thresholds) {
  check_pair(y_true, y_pred);
  if ((y_true.array() <= 0.0).any()) fail(ErrorCode::NonPositiveTruth, "tolerance curves need positive truths");
  const Eigen::ArrayXd rel = ((y_pred - y_true).array() / y_true.array()).abs();
  std::vector<double> out;
  for (double t : thresholds)
    out.push_back(static_cast<double>((rel < t / 100.0).count()) / static_cast<double>(y_true.size()));
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string_view to_string(NrmseNorm n) { return n == NrmseNorm::Mean ? "mean" : "range"; }

nlohmann::json split_json(const SplitSpec& s) {
  if (s.kind == SplitKind::Fraction) return {{"kind", "fraction"}, {"test_fraction", s.test_fraction}};
  return {{"kind", "balanced"}, {"n_per_class", s.n_per_class}};
}

SplitSpec split_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::InvalidConfig, "split must be an object");
  for (const auto& [k, v] : j.items())
    if (k != "kind" && k != "test_fraction" && k != "n_per_class")
      fail(ErrorCode::InvalidConfig, fmt::format("unknown split key '{}'", k));
  const std::string kind = j.value("kind", std::string("fraction"));
  if (kind == "fraction") return SplitSpec::fraction(j.value("test_fraction", 0.2));
  if (kind == "balanced") return SplitSpec::balanced(j.value("n_per_class", 10));
  fail(ErrorCode::InvalidConfig, fmt::format("unknown split kind '{}'", kind));
}

}  // namespace

void ExperimentConfig::validate() const {
  split.validate();
  if (n_seeds < 1) fail(ErrorCode::InvalidConfig, "n_seeds must be >= 1");
  if (threads < 1) fail(ErrorCode::InvalidConfig, "threads must be >= 1");
  if (augment_factor < 1 || !(augment_sigma >= 0.0)) fail(ErrorCode::InvalidConfig, "invalid augmentation settings");
  if (adasyn_k < 1 || !(adasyn_beta >= 0.0 && adasyn_beta <= 1.0))
    fail(ErrorCode::InvalidConfig, "invalid ADASYN settings");
  if (mlp_epochs < 0) fail(ErrorCode::InvalidConfig, "mlp_epochs must be >= 0");
  if (hybrid != HybridMode::GlyBase) {
    if (task() != Task::Regression) fail(ErrorCode::InvalidConfig, "hybrid modes are regression only");
    llm_target_for(target);
    if (!is_vote_model(model)) {
      const auto family = find_preset(model).family;
      if (family != ModelFamily::Forest && family != ModelFamily::Gbt)
        fail(ErrorCode::InvalidConfig, "hybrid backbones are forest or gbt presets");
    }
    if (hybrid == HybridMode::GlyLlm) find_provider(llm_provider, builtin_providers());
  }
  if (is_vote_model(model)) {
    if (task() != Task::Classification) fail(ErrorCode::InvalidConfig, "soft voting needs the hyper target");
    vote_preset_of(model);
  } else {
    const ModelSpec spec = find_preset(model);
    if (spec.family == ModelFamily::Ridge && task() == Task::Classification)
      fail(ErrorCode::InvalidConfig, "ridge is a regression model");
  }
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"feature_set", to_string(c.feature_set)},
          {"target", to_string(c.target)},
          {"model", c.model},
          {"split", split_json(c.split)},
          {"n_seeds", c.n_seeds},
          {"seed", c.seed},
          {"resplit_per_seed", c.resplit_per_seed},
          {"augment", c.augment},
          {"augment_sigma", c.augment_sigma},
          {"augment_factor", c.augment_factor},
          {"adasyn_k", c.adasyn_k},
          {"adasyn_beta", c.adasyn_beta},
          {"normalizer", to_string(c.normalizer)},
          {"mlp_epochs", c.mlp_epochs},
          {"hybrid", to_string(c.hybrid)},
          {"llm_provider", c.llm_provider},
          {"threads", c.threads}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::InvalidConfig, "experiment config must be an object");
  ExperimentConfig c;
  const auto known = to_json(c);
  for (const auto& [k, v] : j.items())
    if (!known.contains(k)) fail(ErrorCode::InvalidConfig, fmt::format("unknown experiment key '{}'", k));
  try {
    if (j.contains("feature_set")) c.feature_set = parse_feature_set(j.at("feature_set").get<std::string>());
    if (j.contains("target")) c.target = parse_target(j.at("target").get<std::string>());
    c.model = j.value("model", c.model);
    if (j.contains("split")) c.split = split_from_json(j.at("split"));
    c.n_seeds = j.value("n_seeds", c.n_seeds);
    c.seed = j.value("seed", c.seed);
    c.resplit_per_seed = j.value("resplit_per_seed", c.resplit_per_seed);
    c.augment = j.value("augment", c.augment);
    c.augment_sigma = j.value("augment_sigma", c.augment_sigma);
    c.augment_factor = j.value("augment_factor", c.augment_factor);
    c.adasyn_k = j.value("adasyn_k", c.adasyn_k);
    c.adasyn_beta = j.value("adasyn_beta", c.adasyn_beta);
    if (j.contains("normalizer")) {
      const auto n = j.at("normalizer").get<std::string>();
      if (n != "mean" && n != "range") fail(ErrorCode::InvalidConfig, fmt::format("unknown normalizer '{}'", n));
      c.normalizer = n == "mean" ? NrmseNorm::Mean : NrmseNorm::Range;
    }
    c.mlp_epochs = j.value("mlp_epochs", c.mlp_epochs);
    if (j.contains("hybrid")) c.hybrid = parse_hybrid_mode(j.at("hybrid").get<std::string>());
    c.llm_provider = j.value("llm_provider", c.llm_provider);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig, fmt::format("experiment config: {}", e.what()));
  }
  c.validate();
  return c;
}

namespace {

// Thread count changes scheduling only, never results.
nlohmann::json result_settings(const ExperimentConfig& config) {
  auto j = to_json(config);
  j.erase("threads");
  return j;
}

}  // namespace

std::string config_fingerprint(const ExperimentConfig& config) { return sha256_hex(result_settings(config).dump()); }

// ---------------------------------------------------------------------------
// Experiments

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(rows[i]);
  return out;
}

void audit_provenance(const TrainingSet& train, const Split& split) {
  const std::set<Eigen::Index> test(split.test.begin(), split.test.end());
  const std::set<Eigen::Index> allowed(split.train.begin(), split.train.end());
  if (static_cast<Eigen::Index>(train.source.size()) != train.rows())
    throw std::logic_error("training rows lack provenance");
  for (Eigen::Index source : train.source) {
    if (test.count(source)) throw std::logic_error(fmt::format("training row derived from test row {}", source));
    if (!allowed.count(source)) throw std::logic_error(fmt::format("training row from unknown source {}", source));
  }
}

ModelSpec with_epochs(ModelSpec spec, int epochs) {
  if (epochs > 0) spec.mlp.epochs = epochs;
  return spec;
}

std::vector<int> to_labels(const Eigen::VectorXd& p) {
  std::vector<int> out(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) out[static_cast<std::size_t>(i)] = p(i) > 0.5 ? 1 : 0;
  return out;
}

LlmColumns take_columns(const LlmColumns& cols, const std::vector<Eigen::Index>& rows) {
  LlmColumns out;
  for (const auto& [id, col] : cols) out[id] = take(col, rows);
  return out;
}

SeedResult run_seed(const LabeledDataset& data, const ExperimentConfig& cfg, int index, const TrainingAudit& audit,
                    const LlmColumns* llm) {
  SeedResult r;
  r.index = index;
  r.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(index)});
  const Task task = cfg.task();
  const Eigen::VectorXd y = data.target(cfg.target);
  const std::vector<int> labels = data.labels();

  const std::uint64_t split_seed = cfg.resplit_per_seed ? derive_seed(r.seed, {1}) : derive_seed(cfg.seed, {~0ULL});
  const Split split = split_rows(data.rows(), labels, cfg.split, split_seed);

  const Eigen::MatrixXd X_train_raw = take_rows(data.X, split.train);
  const Scaler scaler = Scaler::fit(X_train_raw);
  TrainingSet train = TrainingSet::real(scaler.transform(X_train_raw), take(y, split.train), split.train);
  const Eigen::MatrixXd X_test = scaler.transform(take_rows(data.X, split.test));
  const Eigen::VectorXd y_test = take(y, split.test);

  if (task == Task::Classification) {
    AdasynConfig ac;
    ac.k_neighbors = cfg.adasyn_k;
    ac.beta = cfg.adasyn_beta;
    ac.seed = derive_seed(r.seed, {2});
    train = adasyn_balance(train, ac);
  }
  AugmentConfig gc;
  gc.sigma = cfg.augment_sigma;
  gc.factor = cfg.augment_factor;
  gc.seed = derive_seed(r.seed, {3});
  const bool hybrid = cfg.hybrid != HybridMode::GlyBase;
  if (cfg.augment && !hybrid) train = gaussian_augment(train, gc);
  audit_provenance(train, split);
  if (audit) audit(index, train, split);

  r.n_train_real = static_cast<std::size_t>(train.count(RowOrigin::Real));
  r.n_train_synthetic = static_cast<std::size_t>(train.count(RowOrigin::Synthetic));
  r.n_train_augmented = static_cast<std::size_t>(train.count(RowOrigin::Augmented));
  r.n_test = split.test.size();

  const std::uint64_t fit_seed = derive_seed(r.seed, {4});
  Eigen::VectorXd pred;
  if (hybrid) {
    HybridData hd{train.X, X_test, train.y, take_columns(*llm, split.train), take_columns(*llm, split.test)};
    HybridConfig hc;
    hc.mode = cfg.hybrid;
    hc.backbone = find_preset(cfg.model);
    hc.augment = gc;
    hc.llm_provider = cfg.llm_provider;
    hc.seed = fit_seed;
    const HybridResult res = run_hybrid_regression(hd, hc);
    pred = res.test_predictions;
    if (cfg.hybrid == HybridMode::GlyMax) r.n_train_augmented = static_cast<std::size_t>(res.train_rows - train.rows());
  } else if (is_vote_model(cfg.model)) {
    VoteSpecs specs;
    specs.mlp = with_epochs(specs.mlp, cfg.mlp_epochs);
    const auto ensemble =
        fit_soft_vote(vote_preset_of(cfg.model), specs, train.X, train.y, fit_seed);
    pred = ensemble.predict_proba(X_test).col(1);
  } else {
    const Model model = fit_model(with_epochs(find_preset(cfg.model), cfg.mlp_epochs), train.X, train.y, task, fit_seed);
    pred = predict(model, X_test);
  }

  if (task == Task::Classification) {
    std::vector<int> truth(split.test.size());
    for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = labels[static_cast<std::size_t>(split.test[i])];
    const auto m = classification_metrics(truth, to_labels(pred));
    r.metrics = {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
  } else {
    const Eigen::VectorXd y_train_real = take(y, split.train);
    const Eigen::VectorXd baseline = Eigen::VectorXd::Constant(y_test.size(), y_train_real.mean());
    r.metrics = {{"nrmse", nrmse(y_test, pred, cfg.normalizer)},
                 {"rmse", rmse(y_test, pred)},
                 {"mae", (y_test - pred).cwiseAbs().mean()},
                 {"baseline_nrmse", nrmse(y_test, baseline, cfg.normalizer)}};
    if ((y_test.array() > 0.0).all()) r.tolerance = tolerance_curve(y_test, pred);
  }
  return r;
}

}  // namespace

std::vector<std::string> required_providers(const ExperimentConfig& config) {
  if (config.hybrid == HybridMode::GlyLlm) return {config.llm_provider};
  return llm_columns(config.hybrid);
}

LlmTarget llm_target_for(TargetKind target) {
  if (target == TargetKind::Auc) return LlmTarget::Auc;
  if (target == TargetKind::MaxBgl) return LlmTarget::MaxBgl;
  fail(ErrorCode::InvalidConfig, fmt::format("no LLM prompt for target '{}'", to_string(target)));
}

MetricsReport run_experiment(const LabeledDataset& data, const ExperimentConfig& config, const TrainingAudit& audit,
                             const LlmColumns* llm) {
  config.validate();
  if (data.rows() < 2) fail(ErrorCode::EmptyDataset, "the dataset has fewer than two rows");
  if (config.hybrid != HybridMode::GlyBase) {
    if (llm == nullptr) fail(ErrorCode::MissingProvider, "hybrid mode needs LLM predictions");
    for (const auto& id : required_providers(config)) {
      auto it = llm->find(id);
      if (it == llm->end()) fail(ErrorCode::MissingProvider, fmt::format("no predictions from provider '{}'", id));
      if (it->second.size() != data.rows())
        fail(ErrorCode::DimensionMismatch, fmt::format("provider '{}' covers {} of {} rows", id, it->second.size(), data.rows()));
    }
  }

  MetricsReport report;
  report.task = config.task();
  report.config = config;
  report.fingerprint = config_fingerprint(config);
  report.seeds.resize(static_cast<std::size_t>(config.n_seeds));
  std::vector<std::exception_ptr> errors(report.seeds.size());

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < config.n_seeds; i = next++) {
      try {
        report.seeds[static_cast<std::size_t>(i)] = run_seed(data, config, i, audit, llm);
      } catch (const Error& e) {
        errors[static_cast<std::size_t>(i)] =
            std::make_exception_ptr(Error(e.code(), fmt::format("seed {}: {}", i, e.detail())));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int n_threads = std::min(config.threads, config.n_seeds);
  if (n_threads <= 1 || audit) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  const double n = static_cast<double>(report.seeds.size());
  for (const auto& [name, _] : report.seeds.front().metrics) {
    double sum = 0.0;
    for (const auto& s : report.seeds) sum += s.metrics.at(name);
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& s : report.seeds) ss += (s.metrics.at(name) - mean) * (s.metrics.at(name) - mean);
    report.mean[name] = mean;
    report.sd[name] = std::sqrt(ss / n);
  }
  if (report.task == Task::Regression) {
    std::vector<double> sum(kDefaultTolerances.size(), 0.0);
    std::size_t counted = 0;
    for (const auto& s : report.seeds) {
      if (s.tolerance.empty()) continue;
      ++counted;
      for (std::size_t t = 0; t < sum.size(); ++t) sum[t] += s.tolerance[t];
    }
    if (counted > 0)
      for (double v : sum) report.tolerance_mean.push_back(v / static_cast<double>(counted));
  }
  return report;
}

std::vector<MetricsReport> run_split_sweep(const LabeledDataset& data, const ExperimentConfig& config,
                                           const LlmColumns* llm) {
  std::vector<MetricsReport> out;
  for (const SplitSpec& s : training_size_splits()) {
    ExperimentConfig c = config;
    c.split = s;
    out.push_back(run_experiment(data, c, {}, llm));
  }
  return out;
}

nlohmann::json report_to_json(const MetricsReport& r) {
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& s : r.seeds) {
    nlohmann::json j = {{"index", s.index},
                        {"seed", s.seed},
                        {"n_train_real", s.n_train_real},
                        {"n_train_synthetic", s.n_train_synthetic},
                        {"n_train_augmented", s.n_train_augmented},
                        {"n_test", s.n_test},
                        {"metrics", s.metrics}};
    if (r.task == Task::Regression) j["tolerance"] = s.tolerance;
    seeds.push_back(std::move(j));
  }
  nlohmann::json out = {{"format", "glucolens-report"},
                        {"version", 1},
                        {"task", r.task == Task::Regression ? "regression" : "classification"},
                        {"config", result_settings(r.config)},
                        {"fingerprint", r.fingerprint},
                        {"split", r.config.split.label()},
                        {"mean", r.mean},
                        {"sd", r.sd},
                        {"seeds", seeds}};
  if (r.task == Task::Regression) {
    out["tolerance_thresholds"] = kDefaultTolerances;
    out["tolerance_mean"] = r.tolerance_mean;
  }
  return out;
}

std::string render_report(const MetricsReport& r) {
  std::string out;
  out += fmt::format("model {} | features {} | target {} | split {} | seeds {} | experiment seed {}\n", r.config.model,
                     to_string(r.config.feature_set), to_string(r.config.target), r.config.split.label(),
                     r.seeds.size(), r.config.seed);
  out += fmt::format("fingerprint {}\n", r.fingerprint);
  out += fmt::format("{:<16}{:>12}{:>12}\n", "metric", "mean", "sd");
  for (const auto& [name, mean] : r.mean) out += fmt::format("{:<16}{:>12.4f}{:>12.4f}\n", name, mean, r.sd.at(name));
  if (!r.tolerance_mean.empty()) {
    out += "tolerance";
    for (std::size_t t = 0; t < r.tolerance_mean.size(); ++t)
      out += fmt::format("  <{:g}%: {:.3f}", kDefaultTolerances[t], r.tolerance_mean[t]);
    out += '\n';
  }
  return out;
}

}  // namespace glucolens
