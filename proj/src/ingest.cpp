#include "glucolens/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "csv.hpp"
#include "glucolens/error.hpp"
#include "glucolens/io.hpp"

namespace glucolens {
namespace {

std::string lower_normalized(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    if (c == '-' || c == ' ') c = '_';
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

constexpr std::array<std::pair<ActivityKind, std::string_view>, 7> kActivityNames{{
    {ActivityKind::Sedentary, "sedentary"},
    {ActivityKind::Standing, "standing"},
    {ActivityKind::Stepping, "stepping"},
    {ActivityKind::Cycling, "cycling"},
    {ActivityKind::PrimaryLying, "primary_lying"},
    {ActivityKind::SecondaryLying, "secondary_lying"},
    {ActivityKind::SeatedTransport, "seated_transport"},
}};

bool parse_bool(std::string_view s) {
  const std::string v = lower_normalized(s);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  fail(ErrorCode::MalformedRow, fmt::format("bad boolean '{}'", s));
}

void require_finite_nonneg(double v, std::string_view what) {
  if (!std::isfinite(v)) fail(ErrorCode::InvalidRecord, fmt::format("{} is not finite", what));
  if (v < 0.0) fail(ErrorCode::NegativeMacro, fmt::format("{} is negative ({})", what, v));
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, fmt::format("cannot open {}", path.string()));
  return in;
}

template <typename F>
auto in_file(const std::filesystem::path& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{}: {}", path.string(), e.detail()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Domain types

CgmTrace::CgmTrace(std::string participant_id, std::vector<CgmSample> samples)
    : participant_id_(std::move(participant_id)), samples_(std::move(samples)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const double g = samples_[i].glucose;
    if (!(g >= kMinGlucose && g <= kMaxGlucose)) {
      fail(ErrorCode::OutOfRange,
           fmt::format("glucose {} outside [{}, {}] mg/dL", g, kMinGlucose, kMaxGlucose));
    }
    if (i > 0 && !(samples_[i - 1].timestamp < samples_[i].timestamp)) {
      fail(ErrorCode::InvalidRecord, "CGM samples must be strictly increasing in time");
    }
  }
}

std::string_view to_string(ActivityKind kind) {
  for (const auto& [k, name] : kActivityNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ActivityKind> parse_activity_kind(std::string_view name) {
  const std::string key = lower_normalized(csv::trim(name));
  for (const auto& [k, n] : kActivityNames) {
    if (n == key) return k;
  }
  return std::nullopt;
}

ActivityEventLog::ActivityEventLog(std::string participant_id, std::vector<ActivityEvent> events)
    : participant_id_(std::move(participant_id)), events_(std::move(events)) {
  for (std::size_t i = 0; i < events_.size(); ++i) {
    if (!(events_[i].duration_s >= 0.0) || !std::isfinite(events_[i].duration_s)) {
      fail(ErrorCode::InvalidRecord, "activity event duration must be a non-negative number");
    }
    if (i == 0) continue;
    const auto& prev = events_[i - 1];
    const auto& cur = events_[i];
    if (cur.start < prev.start) {
      fail(ErrorCode::InvalidRecord, "activity events must be sorted by start");
    }
    if (prev.end_s() - cur.start_s() > kEventOverlapToleranceSeconds) {
      fail(ErrorCode::OverlappingEvents,
           fmt::format("event at {} overlaps the previous event by {} s", cur.start.to_string(),
                       prev.end_s() - cur.start_s()));
    }
  }
}

std::string_view to_string(MealKind kind) {
  switch (kind) {
    case MealKind::Breakfast: return "breakfast";
    case MealKind::Lunch: return "lunch";
    case MealKind::Dinner: return "dinner";
    case MealKind::Snack: return "snack";
  }
  return "unknown";
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Baseline: return "baseline";
    case Phase::Condition1: return "condition1";
    case Phase::Condition2: return "condition2";
  }
  return "unknown";
}

MealKind parse_meal_kind(std::string_view name) {
  const std::string key = lower_normalized(csv::trim(name));
  for (auto k : {MealKind::Breakfast, MealKind::Lunch, MealKind::Dinner, MealKind::Snack}) {
    if (to_string(k) == key) return k;
  }
  fail(ErrorCode::MalformedRow, fmt::format("unknown meal kind '{}'", name));
}

Phase parse_phase(std::string_view name) {
  const std::string key = lower_normalized(csv::trim(name));
  for (auto p : {Phase::Baseline, Phase::Condition1, Phase::Condition2}) {
    if (to_string(p) == key) return p;
  }
  fail(ErrorCode::MalformedRow, fmt::format("unknown phase '{}'", name));
}

void MacroProfile::validate() const {
  const std::array<std::pair<double, std::string_view>, 12> fields{{
      {calories, "calories"},
      {calories_from_fat, "calories_from_fat"},
      {saturated_fat, "saturated_fat"},
      {trans_fat, "trans_fat"},
      {cholesterol, "cholesterol"},
      {sodium, "sodium"},
      {total_carbs, "total_carbs"},
      {sugar, "sugar"},
      {net_carbs, "net_carbs"},
      {fat, "fat"},
      {protein, "protein"},
      {fiber, "fiber"},
  }};
  for (const auto& [v, name] : fields) require_finite_nonneg(v, name);
  if (net_carbs > total_carbs) {
    fail(ErrorCode::NetCarbExceedsTotal,
         fmt::format("net carbs {} exceed total carbs {}", net_carbs, total_carbs));
  }
  if (calories_from_fat > calories) {
    fail(ErrorCode::InvalidRecord,
         fmt::format("calories from fat {} exceed calories {}", calories_from_fat, calories));
  }
}

MealRecord::MealRecord(std::string participant_id_, DateTime meal_time_, MealKind kind,
                       MacroProfile macros_, Phase phase_)
    : participant_id(std::move(participant_id_)),
      meal_time(meal_time_),
      meal_kind(kind),
      macros(macros_),
      phase(phase_) {
  macros.validate();
}

WorkdayRecord::WorkdayRecord(std::string participant_id_, Date date_, int work_start_,
                             int work_end_, bool work_from_home_, double pct_sitting_,
                             double pct_standing_, double pct_walking_, Phase phase_)
    : participant_id(std::move(participant_id_)),
      date(date_),
      work_start(work_start_),
      work_end(work_end_),
      work_from_home(work_from_home_),
      pct_sitting(pct_sitting_),
      pct_standing(pct_standing_),
      pct_walking(pct_walking_),
      phase(phase_) {
  if (work_start >= work_end) {
    fail(ErrorCode::StartAfterEnd,
         fmt::format("work start {} is not before work end {}", format_clock_minutes(work_start),
                     format_clock_minutes(work_end)));
  }
  for (double p : {pct_sitting, pct_standing, pct_walking}) {
    if (!(p >= 0.0 && p <= 100.0)) {
      fail(ErrorCode::InvalidRecord, fmt::format("percentage {} outside [0, 100]", p));
    }
  }
  const double sum = pct_sitting + pct_standing + pct_walking;
  if (sum > 101.0) {
    fail(ErrorCode::PercentSumExceeded,
         fmt::format("sitting/standing/walking percentages sum to {}", sum));
  }
}

const WorkdayRecord* ParticipantData::workday_on(Date date) const {
  auto it = std::lower_bound(workdays_.begin(), workdays_.end(), date,
                             [](const WorkdayRecord& w, Date d) { return w.date < d; });
  if (it == workdays_.end() || it->date != date) return nullptr;
  return &*it;
}

// ---------------------------------------------------------------------------
// Parsers

CgmTrace parse_cgm(std::istream& in, const std::string& participant_id) {
  csv::Reader reader(in, kCgmHeader);
  csv::Row row;
  std::vector<CgmSample> samples;
  while (reader.next(row)) {
    CgmSample s;
    s.timestamp = csv::with_line(row, [&] { return DateTime::parse(row.fields[0]); });
    s.glucose = csv::to_double(row, 1);
    if (!(s.glucose >= kMinGlucose && s.glucose <= kMaxGlucose)) {
      fail(ErrorCode::OutOfRange, fmt::format("line {}: glucose {} outside [{}, {}] mg/dL",
                                              row.line, s.glucose, kMinGlucose, kMaxGlucose));
    }
    samples.push_back(s);
  }
  if (samples.empty()) fail(ErrorCode::EmptyTrace, "CGM stream has no samples");
  std::stable_sort(samples.begin(), samples.end(),
                   [](const CgmSample& a, const CgmSample& b) { return a.timestamp < b.timestamp; });
  samples.erase(std::unique(samples.begin(), samples.end(),
                            [](const CgmSample& a, const CgmSample& b) {
                              return a.timestamp == b.timestamp;
                            }),
                samples.end());
  return CgmTrace(participant_id, std::move(samples));
}

ActivityEventLog parse_activity_events(std::istream& in, const std::string& participant_id) {
  csv::Reader reader(in, kActivityHeader);
  csv::Row row;
  std::vector<ActivityEvent> events;
  while (reader.next(row)) {
    ActivityEvent e;
    e.start = csv::with_line(row, [&] { return DateTime::parse(row.fields[0]); });
    e.duration_s = csv::to_double(row, 1);
    if (e.duration_s < 0.0) {
      fail(ErrorCode::InvalidRecord, fmt::format("line {}: negative duration", row.line));
    }
    const auto kind = parse_activity_kind(row.fields[2]);
    if (!kind) {
      fail(ErrorCode::UnknownActivityKind,
           fmt::format("line {}: unknown activity kind '{}'", row.line, row.fields[2]));
    }
    e.kind = *kind;
    events.push_back(e);
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const ActivityEvent& a, const ActivityEvent& b) { return a.start < b.start; });
  return ActivityEventLog(participant_id, std::move(events));
}

std::vector<MealRecord> parse_food_log(std::istream& in) {
  csv::Reader reader(in, kFoodLogHeader);
  csv::Row row;
  std::vector<MealRecord> meals;
  while (reader.next(row)) {
    meals.push_back(csv::with_line(row, [&] {
      const Date date = Date::parse(row.fields[1]);
      const int minutes = parse_clock_minutes(row.fields[2]);
      MacroProfile m;
      m.calories = csv::to_double(row, 4);
      m.calories_from_fat = csv::to_double(row, 5);
      m.saturated_fat = csv::to_double(row, 6);
      m.trans_fat = csv::to_double(row, 7);
      m.cholesterol = csv::to_double(row, 8);
      m.sodium = csv::to_double(row, 9);
      m.total_carbs = csv::to_double(row, 10);
      m.sugar = csv::to_double(row, 11);
      m.net_carbs = csv::to_double(row, 12);
      m.fat = csv::to_double(row, 13);
      m.protein = csv::to_double(row, 14);
      m.fiber = csv::to_double(row, 15);
      return MealRecord(row.fields[0], DateTime::at_minute_of_day(date, minutes),
                        parse_meal_kind(row.fields[3]), m);
    }));
  }
  std::stable_sort(meals.begin(), meals.end(), [](const MealRecord& a, const MealRecord& b) {
    return std::tie(a.participant_id, a.meal_time) < std::tie(b.participant_id, b.meal_time);
  });
  return meals;
}

std::vector<WorkdayRecord> parse_work_log(std::istream& in) {
  csv::Reader reader(in, kWorkLogHeader);
  csv::Row row;
  std::vector<WorkdayRecord> days;
  while (reader.next(row)) {
    days.push_back(csv::with_line(row, [&] {
      return WorkdayRecord(row.fields[0], Date::parse(row.fields[1]),
                           parse_clock_minutes(row.fields[2]), parse_clock_minutes(row.fields[3]),
                           parse_bool(row.fields[4]), csv::to_double(row, 5),
                           csv::to_double(row, 6), csv::to_double(row, 7),
                           parse_phase(row.fields[8]));
    }));
  }
  std::stable_sort(days.begin(), days.end(), [](const WorkdayRecord& a, const WorkdayRecord& b) {
    return std::tie(a.participant_id, a.date) < std::tie(b.participant_id, b.date);
  });
  return days;
}

// ---------------------------------------------------------------------------
// Assembly

ParticipantData assemble_participant(std::string participant_id, CgmTrace cgm,
                                     ActivityEventLog activity, std::vector<MealRecord> meals,
                                     std::vector<WorkdayRecord> workdays, double bmi) {
  auto check_id = [&](const std::string& id, std::string_view what) {
    if (id != participant_id) {
      fail(ErrorCode::IdMismatch,
           fmt::format("{} belongs to '{}', expected '{}'", what, id, participant_id));
    }
  };
  check_id(cgm.participant_id(), "CGM trace");
  check_id(activity.participant_id(), "activity log");
  for (const auto& m : meals) check_id(m.participant_id, "meal record");
  for (const auto& w : workdays) check_id(w.participant_id, "work log record");
  if (!(bmi >= kMinBmi && bmi <= kMaxBmi)) {
    fail(ErrorCode::BmiOutOfRange, fmt::format("BMI {} outside [{}, {}]", bmi, kMinBmi, kMaxBmi));
  }
  if (cgm.empty()) fail(ErrorCode::EmptyTrace, fmt::format("participant '{}' has no CGM", participant_id));

  std::sort(workdays.begin(), workdays.end(),
            [](const WorkdayRecord& a, const WorkdayRecord& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < workdays.size(); ++i) {
    if (workdays[i].date == workdays[i - 1].date) {
      fail(ErrorCode::InvalidRecord, fmt::format("duplicate work log for {} on {}", participant_id,
                                                 workdays[i].date.to_string()));
    }
  }
  std::stable_sort(meals.begin(), meals.end(),
                   [](const MealRecord& a, const MealRecord& b) { return a.meal_time < b.meal_time; });

  const Date first_day = cgm.samples().front().timestamp.date();
  const Date last_day = cgm.samples().back().timestamp.date();

  ParticipantData p;
  p.participant_id_ = std::move(participant_id);
  p.bmi_ = bmi;
  p.cgm_ = std::move(cgm);
  p.activity_ = std::move(activity);
  p.workdays_ = std::move(workdays);
  p.meal_flagged_.reserve(meals.size());
  for (auto& m : meals) {
    const Date d = m.meal_time.date();
    if (d < first_day || d > last_day) {
      fail(ErrorCode::InvalidRecord,
           fmt::format("meal at {} lies outside the study window {} .. {}", m.meal_time.to_string(),
                       first_day.to_string(), last_day.to_string()));
    }
    const WorkdayRecord* w = p.workday_on(d);
    if (w != nullptr) m.phase = w->phase;
    p.meal_flagged_.push_back(w == nullptr);
  }
  p.meals_ = std::move(meals);
  return p;
}

// ---------------------------------------------------------------------------
// Writers

void write_cgm(std::ostream& out, const CgmTrace& trace) {
  out << kCgmHeader << '\n';
  for (const auto& s : trace.samples()) {
    out << fmt::format("{},{}\n", s.timestamp.to_string(), s.glucose);
  }
}

void write_activity_events(std::ostream& out, const ActivityEventLog& log) {
  out << kActivityHeader << '\n';
  for (const auto& e : log.events()) {
    out << fmt::format("{},{},{}\n", e.start.to_string(), e.duration_s, to_string(e.kind));
  }
}

void write_food_log(std::ostream& out, std::span<const MealRecord> meals) {
  out << kFoodLogHeader << '\n';
  for (const auto& m : meals) {
    const auto& x = m.macros;
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", m.participant_id,
                       m.meal_time.date().to_string(),
                       format_clock_minutes(static_cast<int>(m.meal_time.seconds_of_day() / 60)),
                       to_string(m.meal_kind), x.calories, x.calories_from_fat, x.saturated_fat,
                       x.trans_fat, x.cholesterol, x.sodium, x.total_carbs, x.sugar, x.net_carbs,
                       x.fat, x.protein, x.fiber);
  }
}

void write_work_log(std::ostream& out, std::span<const WorkdayRecord> workdays) {
  out << kWorkLogHeader << '\n';
  for (const auto& w : workdays) {
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", w.participant_id, w.date.to_string(),
                       format_clock_minutes(w.work_start), format_clock_minutes(w.work_end),
                       w.work_from_home ? 1 : 0, w.pct_sitting, w.pct_standing, w.pct_walking,
                       to_string(w.phase));
  }
}

// ---------------------------------------------------------------------------
// Cohort directories

std::vector<ParticipantData> read_cohort(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const fs::path participants_path = dir / "participants.csv";
  std::vector<std::pair<std::string, double>> ids;
  {
    auto in = open_input(participants_path);
    in_file(participants_path, [&] {
      csv::Reader reader(in, kParticipantsHeader);
      csv::Row row;
      while (reader.next(row)) ids.emplace_back(row.fields[0], csv::to_double(row, 1));
    });
  }
  std::map<std::string, std::vector<MealRecord>> meals_by_id;
  {
    const fs::path path = dir / "food_log.csv";
    auto in = open_input(path);
    for (auto& m : in_file(path, [&] { return parse_food_log(in); })) {
      meals_by_id[m.participant_id].push_back(std::move(m));
    }
  }
  std::map<std::string, std::vector<WorkdayRecord>> work_by_id;
  {
    const fs::path path = dir / "work_log.csv";
    auto in = open_input(path);
    for (auto& w : in_file(path, [&] { return parse_work_log(in); })) {
      work_by_id[w.participant_id].push_back(std::move(w));
    }
  }
  for (const auto& [id, _] : meals_by_id) {
    if (std::none_of(ids.begin(), ids.end(), [&](const auto& p) { return p.first == id; })) {
      fail(ErrorCode::IdMismatch, fmt::format("food log names unknown participant '{}'", id));
    }
  }
  for (const auto& [id, _] : work_by_id) {
    if (std::none_of(ids.begin(), ids.end(), [&](const auto& p) { return p.first == id; })) {
      fail(ErrorCode::IdMismatch, fmt::format("work log names unknown participant '{}'", id));
    }
  }

  std::vector<ParticipantData> cohort;
  for (const auto& [id, bmi] : ids) {
    const fs::path cgm_path = dir / "cgm" / (id + ".csv");
    const fs::path act_path = dir / "activity" / (id + ".csv");
    auto cgm_in = open_input(cgm_path);
    CgmTrace cgm = in_file(cgm_path, [&] { return parse_cgm(cgm_in, id); });
    auto act_in = open_input(act_path);
    ActivityEventLog act = in_file(act_path, [&] { return parse_activity_events(act_in, id); });
    cohort.push_back(assemble_participant(id, std::move(cgm), std::move(act),
                                          std::move(meals_by_id[id]), std::move(work_by_id[id]),
                                          bmi));
  }
  return cohort;
}

void write_cohort(const std::filesystem::path& dir, std::span<const ParticipantData> cohort) {
  namespace fs = std::filesystem;
  fs::path tmp = dir;
  tmp += ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp / "cgm");
  fs::create_directories(tmp / "activity");

  std::ostringstream participants;
  participants << kParticipantsHeader << '\n';
  std::vector<MealRecord> meals;
  std::vector<WorkdayRecord> work;
  for (const auto& p : cohort) {
    participants << fmt::format("{},{}\n", p.participant_id(), p.bmi());
    std::ostringstream cgm;
    write_cgm(cgm, p.cgm());
    write_file_atomic(tmp / "cgm" / (p.participant_id() + ".csv"), cgm.str());
    std::ostringstream act;
    write_activity_events(act, p.activity());
    write_file_atomic(tmp / "activity" / (p.participant_id() + ".csv"), act.str());
    meals.insert(meals.end(), p.meals().begin(), p.meals().end());
    work.insert(work.end(), p.workdays().begin(), p.workdays().end());
  }
  write_file_atomic(tmp / "participants.csv", participants.str());
  std::ostringstream food;
  write_food_log(food, meals);
  write_file_atomic(tmp / "food_log.csv", food.str());
  std::ostringstream wl;
  write_work_log(wl, work);
  write_file_atomic(tmp / "work_log.csv", wl.str());

  fs::remove_all(dir);
  fs::rename(tmp, dir);
}

}  // namespace glucolens
