#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "glucolens/glycemic.hpp"
#include "glucolens/ingest.hpp"

namespace glucolens {

enum class FeatureSetKind { SensorGL, SensorMacro, SelfGL, SelfMacro, All };

inline constexpr FeatureSetKind kAllFeatureSets[] = {
    FeatureSetKind::SensorGL, FeatureSetKind::SensorMacro, FeatureSetKind::SelfGL,
    FeatureSetKind::SelfMacro, FeatureSetKind::All};

// "sensor_gl", "sensor_macro", "self_gl", "self_macro", "all".
std::string_view to_string(FeatureSetKind kind);
FeatureSetKind parse_feature_set(std::string_view name);

// Canonical ordered names of the features present in `kind`. The order is the
// superset order of `All`; every other set is a subsequence of it.
const std::vector<std::string>& feature_names(FeatureSetKind kind);

// Minutes of sitting / standing / stepping in the two pre-lunch intervals.
struct ActivityDurations {
  double prev_day_sit = 0.0;
  double prev_day_stand = 0.0;
  double prev_day_step = 0.0;
  double work_sit = 0.0;
  double work_stand = 0.0;
  double work_step = 0.0;
};

// Which interval feeds the prev_day_* durations.
enum class DayWindow {
  PreviousCalendarDay,  // 00:00-24:00 of the day before lunch
  MidnightToLunch,      // 00:00 of the lunch day up to lunch
};

struct FeatureVector {
  FeatureSetKind set_kind = FeatureSetKind::All;
  std::vector<std::string> names;
  std::vector<double> values;

  // Throws MissingUpstreamFeature if `name` is absent.
  double at(std::string_view name) const;
  std::ptrdiff_t index_of(std::string_view name) const;  // -1 when absent
  std::size_t size() const { return values.size(); }

  bool operator==(const FeatureVector&) const = default;
};

struct FeatureOptions {
  DayWindow day_window = DayWindow::PreviousCalendarDay;
};

double glycemic_load(const MacroProfile& macros);

// Mean walking% plus half the mean standing% over earlier workdays of one
// phase. When `target` is given every record must fall strictly before it.
double activity_score(std::span<const WorkdayRecord> prior_workdays,
                      const Date* target = nullptr);

ActivityDurations activity_durations(const ActivityEventLog& log, DateTime lunch_time,
                                     DateTime work_start,
                                     DayWindow day_window = DayWindow::PreviousCalendarDay);

FeatureVector assemble_features(const ParticipantData& participant, const MealRecord& meal,
                                FeatureSetKind set_kind, const FeatureOptions& options = {});

// Per-feature z-score scaler (population sd); zero-variance columns use sd 1.
class Scaler {
 public:
  Scaler() = default;
  Scaler(Eigen::VectorXd mean, Eigen::VectorXd sd);

  static Scaler fit(const Eigen::MatrixXd& X);

  Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd& Z) const;
  Eigen::VectorXd transform_row(const Eigen::VectorXd& x) const;
  Eigen::VectorXd inverse_transform_row(const Eigen::VectorXd& z) const;

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& sd() const { return sd_; }
  Eigen::Index size() const { return mean_.size(); }

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd sd_;
};

std::pair<Scaler, std::vector<FeatureVector>> standardize(std::span<const FeatureVector> dataset);

Eigen::MatrixXd to_matrix(std::span<const FeatureVector> rows);

enum class TargetKind { Auc, Iauc, MaxBgl, Hyper };
std::string_view to_string(TargetKind kind);
TargetKind parse_target(std::string_view name);

// One row per modelable lunch, in participant then meal-time order.
struct LabeledDataset {
  FeatureSetKind set_kind = FeatureSetKind::All;
  std::vector<std::string> names;
  Eigen::MatrixXd X;
  std::vector<GlycemicTargets> targets;
  // Provenance, not exported with the feature matrix.
  std::vector<std::string> participant;
  std::vector<DateTime> meal_time;

  Eigen::Index rows() const { return X.rows(); }
  Eigen::VectorXd target(TargetKind kind) const;
  std::vector<int> labels() const;
  FeatureVector row(Eigen::Index i) const;
};

struct BuildStats {
  std::size_t lunches = 0;
  std::size_t flagged = 0;  // no same-day workday
  std::size_t skipped = 0;  // missing upstream data or target
};

LabeledDataset build_dataset(std::span<const ParticipantData> cohort, FeatureSetKind set_kind,
                             const TargetConfig& targets = {}, const FeatureOptions& options = {},
                             BuildStats* stats = nullptr);

// CSV: canonical feature names followed by auc,iauc,max_bgl,hyper.
void write_feature_matrix(std::ostream& out, const LabeledDataset& dataset);
LabeledDataset read_feature_matrix(std::istream& in);

}  // namespace glucolens
