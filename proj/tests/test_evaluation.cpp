#include <doctest.h>

#include <set>
#include <sstream>

#include "glucolens/evaluation.hpp"
#include "glucolens/random.hpp"
#include "glucolens/synth.hpp"
#include "helpers.hpp"

using namespace glucolens;
using testing_helpers::error_of;

namespace {

const LabeledDataset& cohort_dataset() {
  static const LabeledDataset ds = build_dataset(synth_cohort({}), FeatureSetKind::All);
  return ds;
}

std::string serialize(const std::vector<ParticipantData>& cohort) {
  std::ostringstream out;
  for (const auto& p : cohort) {
    out << p.participant_id() << ',' << p.bmi() << '\n';
    write_cgm(out, p.cgm());
    write_activity_events(out, p.activity());
    write_food_log(out, p.meals());
    write_work_log(out, p.workdays());
  }
  return out.str();
}

}  // namespace

TEST_CASE("fraction split is disjoint, exhaustive and reproducible") {
  const auto s = split_rows(100, {}, SplitSpec::fraction(0.2), 42);
  CHECK(s.train.size() == 80);
  CHECK(s.test.size() == 20);
  std::set<Eigen::Index> all(s.train.begin(), s.train.end());
  for (auto i : s.test) CHECK(all.insert(i).second);
  CHECK(all.size() == 100);
  const auto again = split_rows(100, {}, SplitSpec::fraction(0.2), 42);
  CHECK(again.test == s.test);
  CHECK(split_rows(100, {}, SplitSpec::fraction(0.2), 43).test != s.test);
  CHECK(split_rows(200, {}, SplitSpec::fraction(0.01), 1).test.size() == 2);
  CHECK(split_rows(10, {}, SplitSpec::fraction(0.01), 1).test.size() == 1);
}

TEST_CASE("balanced split puts n per class in test") {
  std::vector<int> labels(60, 0);
  for (int i = 0; i < 25; ++i) labels[static_cast<std::size_t>(2 * i)] = 1;
  const auto s = split_rows(60, labels, SplitSpec::balanced(10), 3);
  REQUIRE(s.test.size() == 20);
  int pos = 0;
  for (auto i : s.test) pos += labels[static_cast<std::size_t>(i)];
  CHECK(pos == 10);
  CHECK(s.train.size() == 40);

  std::vector<int> few(30, 0);
  for (int i = 0; i < 9; ++i) few[static_cast<std::size_t>(i)] = 1;
  CHECK(error_of([&] { split_rows(30, few, SplitSpec::balanced(10), 0); }) == ErrorCode::InsufficientClassCount);
}

TEST_CASE("split labels and table-6 list") {
  std::vector<std::string> labels;
  for (const auto& s : training_size_splits()) labels.push_back(s.label());
  CHECK(labels == std::vector<std::string>{"70/30", "80/20", "10+10", "90/10", "95/5", "99/1"});
  CHECK(error_of([] { SplitSpec::fraction(1.0); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("nrmse") {
  Eigen::VectorXd t(2), p(2);
  t << 100, 100;
  p << 110, 90;
  CHECK(nrmse(t, p) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(nrmse(t, t) == 0.0);
  Eigen::VectorXd z(2);
  z << -1, 1;
  CHECK(error_of([&] { nrmse(z, p); }) == ErrorCode::ZeroMeanTarget);
  Eigen::VectorXd r(3), q(3);
  r << 0, 5, 10;
  q << 1, 5, 9;
  CHECK(nrmse(r, q, NrmseNorm::Range) == doctest::Approx(std::sqrt(2.0 / 3.0) / 10.0));
}

TEST_CASE("classification metrics") {
  const std::vector<int> t = {1, 0, 1, 0};
  auto m = classification_metrics(t, t);
  CHECK(m.accuracy == 1.0);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == 1.0);

  m = classification_metrics(t, std::vector<int>{1, 1, 1, 1});
  CHECK(m.accuracy == 0.5);

  // Confusion matrix by hand: class 1 has tp 1, fp 1; class 0 never predicted.
  m = classification_metrics(std::vector<int>{1, 0}, std::vector<int>{1, 1});
  CHECK(m.precision == doctest::Approx(0.25));
  CHECK(m.recall == doctest::Approx(0.5));
  CHECK(m.f1 == doctest::Approx((2.0 / 3.0) / 2.0));
  CHECK(m.accuracy == 0.5);
}

TEST_CASE("tolerance curve") {
  Eigen::VectorXd t = Eigen::VectorXd::Constant(4, 100.0), p(4);
  p << 104, 109, 114, 121;
  CHECK(tolerance_curve(t, p) == std::vector<double>{0.25, 0.5, 0.75, 0.75});
  CHECK(tolerance_curve(t, t) == std::vector<double>{1, 1, 1, 1});
  Eigen::VectorXd bad = t;
  bad(0) = 0;
  CHECK(error_of([&] { tolerance_curve(bad, p); }) == ErrorCode::NonPositiveTruth);

  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd a(30), b(30);
    for (int i = 0; i < 30; ++i) {
      a(i) = 50 + 100 * uniform01(rng);
      b(i) = a(i) * (1 + 0.3 * standard_normal(rng));
    }
    const auto c = tolerance_curve(a, b, {1, 3, 5, 10, 15, 20, 50});
    CHECK(std::is_sorted(c.begin(), c.end()));
  }
}

TEST_CASE("config json round trip, strict keys and fingerprint") {
  ExperimentConfig c;
  c.model = "rf_50";
  c.split = SplitSpec::balanced(10);
  c.target = TargetKind::Hyper;
  const auto back = experiment_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(config_fingerprint(back) == config_fingerprint(c));

  auto j = to_json(c);
  j["colour"] = "blue";
  CHECK(error_of([&] { experiment_config_from_json(j); }) == ErrorCode::InvalidConfig);
  CHECK(error_of([] { experiment_config_from_json({{"model", "rf_7"}}); }) == ErrorCode::InvalidConfig);
  CHECK(error_of([] { experiment_config_from_json({{"model", "vote_rf_gbt"}}); }) == ErrorCode::InvalidConfig);

  ExperimentConfig d = c;
  CHECK(config_fingerprint(d) == config_fingerprint(c));
  d.seed = 1;
  CHECK(config_fingerprint(d) != config_fingerprint(c));
  d = c;
  d.augment_sigma = 0.06;
  CHECK(config_fingerprint(d) != config_fingerprint(c));
  d = c;
  d.split = SplitSpec::balanced(9);
  CHECK(config_fingerprint(d) != config_fingerprint(c));
}

TEST_CASE("one seed equals a manual run") {
  const auto& ds = cohort_dataset();
  ExperimentConfig c;
  c.model = "ridge_a1";
  c.n_seeds = 1;
  c.seed = 9;
  const auto report = run_experiment(ds, c);

  const std::uint64_t s = derive_seed(9, {0});
  const Split split = split_rows(ds.rows(), ds.labels(), c.split, derive_seed(s, {1}));
  Eigen::MatrixXd Xtr(static_cast<Eigen::Index>(split.train.size()), ds.X.cols()), Xte(static_cast<Eigen::Index>(split.test.size()), ds.X.cols());
  const Eigen::VectorXd y = ds.target(TargetKind::Auc);
  Eigen::VectorXd ytr(Xtr.rows()), yte(Xte.rows());
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    Xtr.row(static_cast<Eigen::Index>(i)) = ds.X.row(split.train[i]);
    ytr(static_cast<Eigen::Index>(i)) = y(split.train[i]);
  }
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    Xte.row(static_cast<Eigen::Index>(i)) = ds.X.row(split.test[i]);
    yte(static_cast<Eigen::Index>(i)) = y(split.test[i]);
  }
  const Scaler scaler = Scaler::fit(Xtr);
  const RidgeModel m = ridge_fit(scaler.transform(Xtr), ytr, 1.0);
  CHECK(report.mean.at("nrmse") == doctest::Approx(nrmse(yte, m.predict(scaler.transform(Xte)))).epsilon(1e-12));
  CHECK(report.seeds[0].n_test == split.test.size());
}

TEST_CASE("aggregate is the mean of per-seed values; threads do not matter") {
  const auto& ds = cohort_dataset();
  ExperimentConfig c;
  c.model = "rf_10";
  c.n_seeds = 6;
  const auto a = run_experiment(ds, c);
  double sum = 0;
  for (const auto& s : a.seeds) sum += s.metrics.at("nrmse");
  CHECK(a.mean.at("nrmse") == doctest::Approx(sum / 6).epsilon(1e-14));
  c.threads = 3;
  const auto b = run_experiment(ds, c);
  c.threads = 1;
  CHECK(report_to_json(a).dump() == report_to_json(b).dump());
}

TEST_CASE("planted signal: forest beats the mean predictor") {
  ExperimentConfig c;
  c.model = "rf_50";
  c.n_seeds = 10;
  const auto r = run_experiment(cohort_dataset(), c);
  CHECK(r.mean.at("nrmse") < 0.8 * r.mean.at("baseline_nrmse"));
  REQUIRE(r.tolerance_mean.size() == 4);
  CHECK(std::is_sorted(r.tolerance_mean.begin(), r.tolerance_mean.end()));
}

TEST_CASE("no resampled row ever touches the test side") {
  ExperimentConfig c;
  c.target = TargetKind::Hyper;
  c.model = "rf_10";
  c.n_seeds = 8;
  c.augment = true;
  c.split = SplitSpec::balanced(10);
  int audited = 0;
  const auto r = run_experiment(cohort_dataset(), c, [&](int, const TrainingSet& train, const Split& split) {
    ++audited;
    const std::set<Eigen::Index> test(split.test.begin(), split.test.end());
    CHECK(train.count(RowOrigin::Synthetic) > 0);
    CHECK(train.count(RowOrigin::Augmented) > 0);
    for (auto src : train.source) CHECK(test.count(src) == 0);
  });
  CHECK(audited == 8);
  for (const auto& s : r.seeds) CHECK(s.n_test == 20);
}

TEST_CASE("split sweep yields six reports") {
  ExperimentConfig c;
  c.target = TargetKind::Hyper;
  c.model = "rf_10";
  c.n_seeds = 2;
  const auto reports = run_split_sweep(cohort_dataset(), c);
  REQUIRE(reports.size() == 6);
  std::set<std::string> prints;
  for (const auto& r : reports) prints.insert(r.fingerprint);
  CHECK(prints.size() == 6);
  CHECK(reports[2].seeds[0].n_test == 20);
}

TEST_CASE("errors carry the seed index") {
  LabeledDataset ds = cohort_dataset();
  for (auto& t : ds.targets) t.hyperglycemic = false;
  ExperimentConfig c;
  c.target = TargetKind::Hyper;
  c.model = "rf_10";
  c.n_seeds = 2;
  try {
    run_experiment(ds, c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingleClass);
    CHECK(std::string(e.what()).find("seed 0") != std::string::npos);
  }
}

TEST_CASE("report schema does not depend on the seed") {
  ExperimentConfig c;
  c.model = "rf_10";
  c.n_seeds = 2;
  const auto a = report_to_json(run_experiment(cohort_dataset(), c));
  c.seed = 77;
  const auto b = report_to_json(run_experiment(cohort_dataset(), c));
  CHECK(a["fingerprint"] != b["fingerprint"]);
  std::vector<std::string> ka, kb;
  for (const auto& [k, v] : a.items()) ka.push_back(k);
  for (const auto& [k, v] : b.items()) kb.push_back(k);
  CHECK(ka == kb);
}

TEST_CASE("synthetic cohort") {
  SynthCohortSpec spec;
  spec.seed = 4;
  const auto a = synth_cohort(spec);
  CHECK(a.size() == 10);
  CHECK(serialize(a) == serialize(synth_cohort(spec)));
  for (const auto& p : a)
    for (const auto& s : p.cgm().samples()) {
      CHECK(s.glucose >= 40.0);
      CHECK(s.glucose <= 400.0);
    }
  // 5 study weeks of 5 workdays.
  CHECK(a[0].workdays().size() == 25);
  CHECK(a[0].workdays().front().phase == Phase::Baseline);
  CHECK(a[0].workdays().back().phase == Phase::Condition2);

  const double sem = 4.5 / std::sqrt(10.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    double sum = 0;
    for (const auto& p : synth_cohort(spec)) sum += p.bmi();
    CHECK(std::abs(sum / 10.0 - 32.8) <= 3 * sem);
  }

  const auto& ds = cohort_dataset();
  CHECK(ds.rows() > 150);
  const auto h = ds.target(TargetKind::Hyper);
  CHECK(h.sum() >= 20);
  CHECK(h.sum() <= ds.rows() - 20);

  spec.n_participants = 0;
  CHECK(error_of([&] { synth_cohort(spec); }) == ErrorCode::InvalidConfig);
  CHECK(error_of([] { synth_spec_from_json({{"participants", 3}}); }) == ErrorCode::InvalidConfig);
  CHECK(to_json(synth_spec_from_json(to_json(SynthCohortSpec{}))) == to_json(SynthCohortSpec{}));
}

TEST_CASE("synthetic cohort survives a disk round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "glucolens_synth_roundtrip";
  std::filesystem::remove_all(dir);
  SynthCohortSpec spec;
  spec.n_participants = 2;
  const auto cohort = synth_cohort(spec);
  write_cohort(dir, cohort);
  const auto back = read_cohort(dir);
  CHECK(serialize(back) == serialize(cohort));
  std::filesystem::remove_all(dir);
}

TEST_CASE("hybrid modes run offline with mock providers") {
  const auto& ds = cohort_dataset();
  std::vector<FeatureVector> rows;
  for (Eigen::Index i = 0; i < ds.rows(); ++i) rows.push_back(ds.row(i));
  const LlmColumns llm = collect_llm_predictions(builtin_providers(), hybrid_providers(), rows, LlmTarget::Auc,
                                                 PromptTemplate::builtin(), nullptr, false);
  ExperimentConfig c;
  c.model = "rf_10";
  c.n_seeds = 2;
  for (auto mode : {HybridMode::GlyLlm, HybridMode::GlyHybrid, HybridMode::GlyHybridV2, HybridMode::GlyMax}) {
    c.hybrid = mode;
    const auto r = run_experiment(ds, c, {}, &llm);
    CHECK(r.mean.at("nrmse") > 0.0);
    CHECK(r.mean.at("nrmse") < r.mean.at("baseline_nrmse"));
    if (mode == HybridMode::GlyMax) CHECK(r.seeds[0].n_train_augmented == r.seeds[0].n_train_real);
  }
  CHECK(error_of([&] { run_experiment(ds, c); }) == ErrorCode::MissingProvider);
  c.target = TargetKind::Hyper;
  CHECK(error_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
  c.target = TargetKind::Iauc;
  CHECK(error_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
}
