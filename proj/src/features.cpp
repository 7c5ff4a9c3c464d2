#include "glucolens/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "csv.hpp"
#include "glucolens/error.hpp"

namespace glucolens {
namespace {

constexpr const char* kCommon[] = {
    "fasting_glucose", "recent_cgm",  "lunch_time", "work_from_home", "bmi",
    "calories",        "calories_from_fat", "saturated_fat", "trans_fat", "cholesterol",
    "sodium",          "total_carbs", "sugar",      "work_start_time", "day_of_week",
};
constexpr const char* kSensor[] = {"prev_day_sit", "prev_day_stand", "prev_day_step",
                                   "work_sit",     "work_stand",     "work_step"};
constexpr const char* kSelf = "activity_score";
constexpr const char* kGl = "glycemic_load";
constexpr const char* kMacro[] = {"net_carbs", "fat", "protein", "fiber"};

bool has_sensor(FeatureSetKind k) {
  return k == FeatureSetKind::SensorGL || k == FeatureSetKind::SensorMacro ||
         k == FeatureSetKind::All;
}
bool has_self(FeatureSetKind k) {
  return k == FeatureSetKind::SelfGL || k == FeatureSetKind::SelfMacro || k == FeatureSetKind::All;
}
bool has_gl(FeatureSetKind k) {
  return k == FeatureSetKind::SensorGL || k == FeatureSetKind::SelfGL || k == FeatureSetKind::All;
}
bool has_macro(FeatureSetKind k) {
  return k == FeatureSetKind::SensorMacro || k == FeatureSetKind::SelfMacro ||
         k == FeatureSetKind::All;
}

std::vector<std::string> build_names(FeatureSetKind k) {
  std::vector<std::string> names(std::begin(kCommon), std::end(kCommon));
  if (has_sensor(k)) names.insert(names.end(), std::begin(kSensor), std::end(kSensor));
  if (has_self(k)) names.emplace_back(kSelf);
  if (has_gl(k)) names.emplace_back(kGl);
  if (has_macro(k)) names.insert(names.end(), std::begin(kMacro), std::end(kMacro));
  return names;
}

// Minutes of overlap between every event of the given buckets and [from, to).
void accumulate(const ActivityEventLog& log, double from, double to, double& sit, double& stand,
                double& step) {
  sit = stand = step = 0.0;
  const auto events = log.events();
  auto it = std::lower_bound(events.begin(), events.end(), from,
                             [](const ActivityEvent& e, double t) { return e.start_s() < t; });
  while (it != events.begin() && std::prev(it)->end_s() > from) --it;
  for (; it != events.end() && it->start_s() < to; ++it) {
    const double overlap = std::min(it->end_s(), to) - std::max(it->start_s(), from);
    if (overlap <= 0.0) continue;
    const double minutes = overlap / 60.0;
    switch (it->kind) {
      case ActivityKind::Sedentary:
      case ActivityKind::SeatedTransport: sit += minutes; break;
      case ActivityKind::Standing: stand += minutes; break;
      case ActivityKind::Stepping: step += minutes; break;
      default: break;
    }
  }
}

template <typename F>
double upstream(std::string_view what, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    fail(ErrorCode::MissingUpstreamFeature, fmt::format("{} ({})", what, e.detail()));
  }
}

}  // namespace

std::string_view to_string(FeatureSetKind kind) {
  switch (kind) {
    case FeatureSetKind::SensorGL: return "sensor_gl";
    case FeatureSetKind::SensorMacro: return "sensor_macro";
    case FeatureSetKind::SelfGL: return "self_gl";
    case FeatureSetKind::SelfMacro: return "self_macro";
    case FeatureSetKind::All: return "all";
  }
  return "unknown";
}

FeatureSetKind parse_feature_set(std::string_view name) {
  for (auto k : kAllFeatureSets) {
    if (to_string(k) == name) return k;
  }
  fail(ErrorCode::InvalidConfig, fmt::format("unknown feature set '{}'", name));
}

const std::vector<std::string>& feature_names(FeatureSetKind kind) {
  static const std::vector<std::string> names[] = {
      build_names(FeatureSetKind::SensorGL), build_names(FeatureSetKind::SensorMacro),
      build_names(FeatureSetKind::SelfGL), build_names(FeatureSetKind::SelfMacro),
      build_names(FeatureSetKind::All)};
  return names[static_cast<int>(kind)];
}

double FeatureVector::at(std::string_view name) const {
  const auto i = index_of(name);
  if (i < 0) fail(ErrorCode::MissingUpstreamFeature, fmt::format("feature '{}' absent", name));
  return values[static_cast<std::size_t>(i)];
}

std::ptrdiff_t FeatureVector::index_of(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : std::distance(names.begin(), it);
}

double glycemic_load(const MacroProfile& m) {
  return 19.27 + 0.39 * m.net_carbs - 0.21 * m.fat - 0.01 * m.protein * m.protein -
         0.01 * m.fiber * m.fiber;
}

double activity_score(std::span<const WorkdayRecord> prior, const Date* target) {
  if (prior.empty()) fail(ErrorCode::NoPriorDays, "no prior workdays for the activity score");
  double walk = 0.0, stand = 0.0;
  for (const auto& w : prior) {
    if (w.phase != prior.front().phase) {
      fail(ErrorCode::InvalidRecord, "prior workdays span more than one phase");
    }
    if (target != nullptr && !(w.date < *target)) {
      fail(ErrorCode::InvalidRecord,
           fmt::format("workday {} is not before {}", w.date.to_string(), target->to_string()));
    }
    walk += w.pct_walking;
    stand += w.pct_standing;
  }
  const auto n = static_cast<double>(prior.size());
  return walk / n + 0.5 * (stand / n);
}

ActivityDurations activity_durations(const ActivityEventLog& log, DateTime lunch_time,
                                     DateTime work_start, DayWindow day_window) {
  if (log.empty()) fail(ErrorCode::EmptyLog, "activity log has no events");
  if (!(work_start < lunch_time)) {
    fail(ErrorCode::InvalidRecord, fmt::format("work start {} is not before lunch {}",
                                               work_start.to_string(), lunch_time.to_string()));
  }
  ActivityDurations d;
  const double lunch_s = static_cast<double>(lunch_time.seconds());
  const double midnight_s = static_cast<double>(DateTime::at_midnight(lunch_time.date()).seconds());
  if (day_window == DayWindow::PreviousCalendarDay) {
    accumulate(log, midnight_s - 86400.0, midnight_s, d.prev_day_sit, d.prev_day_stand,
               d.prev_day_step);
  } else {
    accumulate(log, midnight_s, lunch_s, d.prev_day_sit, d.prev_day_stand, d.prev_day_step);
  }
  accumulate(log, static_cast<double>(work_start.seconds()), lunch_s, d.work_sit, d.work_stand,
             d.work_step);
  return d;
}

FeatureVector assemble_features(const ParticipantData& p, const MealRecord& meal,
                                FeatureSetKind set_kind, const FeatureOptions& options) {
  if (meal.meal_kind != MealKind::Lunch) {
    fail(ErrorCode::InvalidRecord, "features are defined for lunch meals only");
  }
  const Date day = meal.meal_time.date();
  const WorkdayRecord* work = p.workday_on(day);
  if (work == nullptr) fail(ErrorCode::MissingUpstreamFeature, "work start time");

  FeatureVector fv;
  fv.set_kind = set_kind;
  fv.names = feature_names(set_kind);
  fv.values.reserve(fv.names.size());
  const auto& m = meal.macros;

  auto& v = fv.values;
  v.push_back(upstream("fasting glucose", [&] { return fasting_glucose(p.cgm(), day); }));
  v.push_back(upstream("recent CGM", [&] { return recent_cgm(p.cgm(), day); }));
  v.push_back(meal.meal_time.minute_of_day());
  v.push_back(work->work_from_home ? 1.0 : 0.0);
  v.push_back(p.bmi());
  v.insert(v.end(), {m.calories, m.calories_from_fat, m.saturated_fat, m.trans_fat, m.cholesterol,
                     m.sodium, m.total_carbs, m.sugar});
  v.push_back(static_cast<double>(work->work_start));
  v.push_back(static_cast<double>(day.day_of_week()));

  if (has_sensor(set_kind)) {
    const DateTime work_start = DateTime::at_minute_of_day(day, work->work_start);
    ActivityDurations d;
    try {
      d = activity_durations(p.activity(), meal.meal_time, work_start, options.day_window);
    } catch (const Error& e) {
      fail(ErrorCode::MissingUpstreamFeature, fmt::format("activity durations ({})", e.detail()));
    }
    v.insert(v.end(), {d.prev_day_sit, d.prev_day_stand, d.prev_day_step, d.work_sit,
                       d.work_stand, d.work_step});
  }
  if (has_self(set_kind)) {
    std::vector<WorkdayRecord> prior;
    for (const auto& w : p.workdays()) {
      if (w.phase == work->phase && w.date < day) prior.push_back(w);
    }
    v.push_back(upstream("activity score", [&] { return activity_score(prior, &day); }));
  }
  if (has_gl(set_kind)) v.push_back(glycemic_load(m));
  if (has_macro(set_kind)) v.insert(v.end(), {m.net_carbs, m.fat, m.protein, m.fiber});
  return fv;
}

// ---------------------------------------------------------------------------
// Scaling

Scaler::Scaler(Eigen::VectorXd mean, Eigen::VectorXd sd) : mean_(std::move(mean)), sd_(std::move(sd)) {
  if (mean_.size() != sd_.size()) fail(ErrorCode::DimensionMismatch, "scaler mean/sd sizes differ");
}

Scaler Scaler::fit(const Eigen::MatrixXd& X) {
  if (X.rows() < 1) fail(ErrorCode::EmptyDataset, "cannot fit a scaler on no rows");
  Eigen::VectorXd mean = X.colwise().mean().transpose();
  Eigen::VectorXd sd(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double var = (X.col(j).array() - mean(j)).square().mean();
    sd(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return Scaler(std::move(mean), std::move(sd));
}

Eigen::MatrixXd Scaler::transform(const Eigen::MatrixXd& X) const {
  if (X.cols() != mean_.size()) {
    fail(ErrorCode::DimensionMismatch,
         fmt::format("scaler has {} features, input has {}", mean_.size(), X.cols()));
  }
  return (X.rowwise() - mean_.transpose()).array().rowwise() / sd_.transpose().array();
}

Eigen::MatrixXd Scaler::inverse_transform(const Eigen::MatrixXd& Z) const {
  if (Z.cols() != mean_.size()) fail(ErrorCode::DimensionMismatch, "scaler width mismatch");
  return (Z.array().rowwise() * sd_.transpose().array()).matrix().rowwise() + mean_.transpose();
}

Eigen::VectorXd Scaler::transform_row(const Eigen::VectorXd& x) const {
  return transform(x.transpose()).transpose();
}

Eigen::VectorXd Scaler::inverse_transform_row(const Eigen::VectorXd& z) const {
  return inverse_transform(z.transpose()).transpose();
}

Eigen::MatrixXd to_matrix(std::span<const FeatureVector> rows) {
  if (rows.empty()) return {};
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) {
      fail(ErrorCode::DimensionMismatch, "feature vectors differ in length");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].values[j];
    }
  }
  return X;
}

std::pair<Scaler, std::vector<FeatureVector>> standardize(std::span<const FeatureVector> dataset) {
  if (dataset.size() < 2) fail(ErrorCode::EmptyDataset, "standardize needs at least 2 rows");
  for (const auto& fv : dataset) {
    if (fv.set_kind != dataset.front().set_kind || fv.names != dataset.front().names) {
      fail(ErrorCode::HeterogeneousSets, "rows come from different feature sets");
    }
  }
  const Eigen::MatrixXd X = to_matrix(dataset);
  Scaler scaler = Scaler::fit(X);
  const Eigen::MatrixXd Z = scaler.transform(X);
  std::vector<FeatureVector> out(dataset.begin(), dataset.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = 0; j < out[i].size(); ++j) {
      out[i].values[j] = Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return {std::move(scaler), std::move(out)};
}

// ---------------------------------------------------------------------------
// Datasets

std::string_view to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::Auc: return "auc";
    case TargetKind::Iauc: return "iauc";
    case TargetKind::MaxBgl: return "max_bgl";
    case TargetKind::Hyper: return "hyper";
  }
  return "unknown";
}

TargetKind parse_target(std::string_view name) {
  for (auto k : {TargetKind::Auc, TargetKind::Iauc, TargetKind::MaxBgl, TargetKind::Hyper}) {
    if (to_string(k) == name) return k;
  }
  fail(ErrorCode::InvalidConfig, fmt::format("unknown target '{}'", name));
}

Eigen::VectorXd LabeledDataset::target(TargetKind kind) const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(targets.size()));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& t = targets[i];
    double v = 0.0;
    switch (kind) {
      case TargetKind::Auc: v = t.auc; break;
      case TargetKind::Iauc: v = t.iauc; break;
      case TargetKind::MaxBgl: v = t.max_bgl; break;
      case TargetKind::Hyper: v = t.hyperglycemic ? 1.0 : 0.0; break;
    }
    y(static_cast<Eigen::Index>(i)) = v;
  }
  return y;
}

std::vector<int> LabeledDataset::labels() const {
  std::vector<int> out;
  out.reserve(targets.size());
  for (const auto& t : targets) out.push_back(t.hyperglycemic ? 1 : 0);
  return out;
}

FeatureVector LabeledDataset::row(Eigen::Index i) const {
  FeatureVector fv;
  fv.set_kind = set_kind;
  fv.names = names;
  fv.values.resize(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index j = 0; j < X.cols(); ++j) fv.values[static_cast<std::size_t>(j)] = X(i, j);
  return fv;
}

LabeledDataset build_dataset(std::span<const ParticipantData> cohort, FeatureSetKind set_kind,
                             const TargetConfig& target_config, const FeatureOptions& options,
                             BuildStats* stats) {
  BuildStats local;
  std::vector<FeatureVector> rows;
  LabeledDataset ds;
  ds.set_kind = set_kind;
  ds.names = feature_names(set_kind);
  for (const auto& p : cohort) {
    for (std::size_t i = 0; i < p.meals().size(); ++i) {
      const auto& meal = p.meals()[i];
      if (meal.meal_kind != MealKind::Lunch) continue;
      ++local.lunches;
      if (p.meal_flagged()[i]) {
        ++local.flagged;
        continue;
      }
      try {
        FeatureVector fv = assemble_features(p, meal, set_kind, options);
        GlycemicTargets t = compute_targets(p.cgm(), meal.meal_time, target_config);
        rows.push_back(std::move(fv));
        ds.targets.push_back(t);
        ds.participant.push_back(p.participant_id());
        ds.meal_time.push_back(meal.meal_time);
      } catch (const Error&) {
        ++local.skipped;
      }
    }
  }
  ds.X = rows.empty() ? Eigen::MatrixXd(0, static_cast<Eigen::Index>(ds.names.size()))
                      : to_matrix(rows);
  if (stats != nullptr) *stats = local;
  return ds;
}

void write_feature_matrix(std::ostream& out, const LabeledDataset& ds) {
  for (const auto& n : ds.names) out << n << ',';
  out << "auc,iauc,max_bgl,hyper\n";
  for (Eigen::Index i = 0; i < ds.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.X.cols(); ++j) out << fmt::format("{},", ds.X(i, j));
    const auto& t = ds.targets[static_cast<std::size_t>(i)];
    out << fmt::format("{},{},{},{}\n", t.auc, t.iauc, t.max_bgl, t.hyperglycemic ? 1 : 0);
  }
}

LabeledDataset read_feature_matrix(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) fail(ErrorCode::MalformedRow, "line 1: missing header");
  const auto cols = csv::split(csv::trim(header));
  if (cols.size() < 5) fail(ErrorCode::MalformedRow, "line 1: too few columns");
  const std::vector<std::string> names(cols.begin(), cols.end() - 4);
  const std::vector<std::string> tail(cols.end() - 4, cols.end());
  if (tail != std::vector<std::string>{"auc", "iauc", "max_bgl", "hyper"}) {
    fail(ErrorCode::MalformedRow, "line 1: feature matrix must end with auc,iauc,max_bgl,hyper");
  }
  LabeledDataset ds;
  bool matched = false;
  for (auto k : kAllFeatureSets) {
    if (feature_names(k) == names) {
      ds.set_kind = k;
      matched = true;
    }
  }
  if (!matched) fail(ErrorCode::MalformedRow, "line 1: header matches no known feature set");
  ds.names = names;

  std::vector<std::vector<double>> rows;
  std::string text;
  std::size_t line = 1;
  while (std::getline(in, text)) {
    ++line;
    if (csv::trim(text).empty()) continue;
    csv::Row row{line, csv::split(text)};
    if (row.fields.size() != cols.size()) {
      fail(ErrorCode::MalformedRow,
           fmt::format("line {}: expected {} fields, got {}", line, cols.size(), row.fields.size()));
    }
    std::vector<double> values;
    for (std::size_t j = 0; j < row.fields.size(); ++j) values.push_back(csv::to_double(row, j));
    rows.push_back(std::move(values));
  }
  const auto p = static_cast<Eigen::Index>(names.size());
  ds.X.resize(static_cast<Eigen::Index>(rows.size()), p);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < p; ++j) ds.X(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    GlycemicTargets t;
    t.auc = rows[i][names.size()];
    t.iauc = rows[i][names.size() + 1];
    t.max_bgl = rows[i][names.size() + 2];
    t.hyperglycemic = rows[i][names.size() + 3] != 0.0;
    ds.targets.push_back(t);
  }
  return ds;
}

}  // namespace glucolens
