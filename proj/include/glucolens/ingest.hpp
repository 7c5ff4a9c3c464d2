#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glucolens/time.hpp"

namespace glucolens {

inline constexpr double kMinGlucose = 20.0;
inline constexpr double kMaxGlucose = 600.0;
inline constexpr double kMinBmi = 10.0;
inline constexpr double kMaxBmi = 80.0;
inline constexpr double kEventOverlapToleranceSeconds = 1.0;

inline constexpr std::string_view kCgmHeader = "timestamp,glucose_mgdl";
inline constexpr std::string_view kActivityHeader = "start,duration_s,kind";
inline constexpr std::string_view kFoodLogHeader =
    "participant,date,meal_time,kind,calories,cal_fat,sat_fat_g,trans_fat_g,cholesterol_mg,"
    "sodium_mg,total_carbs_g,sugar_g,net_carbs_g,fat_g,protein_g,fiber_g";
inline constexpr std::string_view kWorkLogHeader =
    "participant,date,work_start,work_end,wfh,pct_sit,pct_stand,pct_walk,phase";
inline constexpr std::string_view kParticipantsHeader = "participant,bmi";

struct CgmSample {
  DateTime timestamp;
  double glucose = 0.0;  // mg/dL
};

// Samples strictly increasing in time, each within the physical glucose bounds.
class CgmTrace {
 public:
  CgmTrace() = default;
  CgmTrace(std::string participant_id, std::vector<CgmSample> samples);

  const std::string& participant_id() const { return participant_id_; }
  std::span<const CgmSample> samples() const { return samples_; }
  bool empty() const { return samples_.empty(); }

 private:
  std::string participant_id_;
  std::vector<CgmSample> samples_;
};

enum class ActivityKind {
  Sedentary,
  Standing,
  Stepping,
  Cycling,
  PrimaryLying,
  SecondaryLying,
  SeatedTransport,
};

std::string_view to_string(ActivityKind kind);
// Case-insensitive; '_', '-' and ' ' are interchangeable.
std::optional<ActivityKind> parse_activity_kind(std::string_view name);

struct ActivityEvent {
  DateTime start;
  double duration_s = 0.0;
  ActivityKind kind = ActivityKind::Sedentary;

  double start_s() const { return static_cast<double>(start.seconds()); }
  double end_s() const { return start_s() + duration_s; }
};

// Sorted by start; consecutive events may overlap by at most one second.
class ActivityEventLog {
 public:
  ActivityEventLog() = default;
  ActivityEventLog(std::string participant_id, std::vector<ActivityEvent> events);

  const std::string& participant_id() const { return participant_id_; }
  std::span<const ActivityEvent> events() const { return events_; }
  bool empty() const { return events_.empty(); }

 private:
  std::string participant_id_;
  std::vector<ActivityEvent> events_;
};

enum class MealKind { Breakfast, Lunch, Dinner, Snack };
enum class Phase { Baseline, Condition1, Condition2 };

std::string_view to_string(MealKind kind);
std::string_view to_string(Phase phase);
MealKind parse_meal_kind(std::string_view name);
Phase parse_phase(std::string_view name);

struct MacroProfile {
  double calories = 0.0;           // kCal
  double calories_from_fat = 0.0;  // kCal
  double saturated_fat = 0.0;      // g
  double trans_fat = 0.0;          // g
  double cholesterol = 0.0;        // mg
  double sodium = 0.0;             // mg
  double total_carbs = 0.0;        // g
  double sugar = 0.0;              // g
  double net_carbs = 0.0;          // g
  double fat = 0.0;                // g
  double protein = 0.0;            // g
  double fiber = 0.0;              // g

  // Throws NegativeMacro / NetCarbExceedsTotal / InvalidRecord.
  void validate() const;

  bool operator==(const MacroProfile&) const = default;
};

struct MealRecord {
  MealRecord() = default;
  // Validates the macro profile.
  MealRecord(std::string participant_id, DateTime meal_time, MealKind kind, MacroProfile macros,
             Phase phase = Phase::Baseline);

  std::string participant_id;
  DateTime meal_time;
  MealKind meal_kind = MealKind::Lunch;
  MacroProfile macros;
  // The food log carries no phase column; it is filled from the same-day
  // work log when the participant is assembled.
  Phase phase = Phase::Baseline;

  bool operator==(const MealRecord&) const = default;
};

struct WorkdayRecord {
  WorkdayRecord() = default;
  // Throws StartAfterEnd / PercentSumExceeded / InvalidRecord.
  WorkdayRecord(std::string participant_id, Date date, int work_start, int work_end,
                bool work_from_home, double pct_sitting, double pct_standing, double pct_walking,
                Phase phase);

  std::string participant_id;
  Date date;
  int work_start = 0;  // minutes since midnight
  int work_end = 0;
  bool work_from_home = false;
  double pct_sitting = 0.0;
  double pct_standing = 0.0;
  double pct_walking = 0.0;
  Phase phase = Phase::Baseline;

  bool operator==(const WorkdayRecord&) const = default;
};

class ParticipantData {
 public:
  const std::string& participant_id() const { return participant_id_; }
  double bmi() const { return bmi_; }
  const CgmTrace& cgm() const { return cgm_; }
  const ActivityEventLog& activity() const { return activity_; }
  std::span<const MealRecord> meals() const { return meals_; }
  std::span<const WorkdayRecord> workdays() const { return workdays_; }

  // Meals lacking a same-day workday (weekends, days off). They are kept in
  // the record but never modeled.
  const std::vector<bool>& meal_flagged() const { return meal_flagged_; }
  const WorkdayRecord* workday_on(Date date) const;

 private:
  friend ParticipantData assemble_participant(std::string, CgmTrace, ActivityEventLog,
                                              std::vector<MealRecord>,
                                              std::vector<WorkdayRecord>, double);

  std::string participant_id_;
  double bmi_ = 0.0;
  CgmTrace cgm_;
  ActivityEventLog activity_;
  std::vector<MealRecord> meals_;
  std::vector<WorkdayRecord> workdays_;
  std::vector<bool> meal_flagged_;
};

CgmTrace parse_cgm(std::istream& in, const std::string& participant_id);
ActivityEventLog parse_activity_events(std::istream& in, const std::string& participant_id);
std::vector<MealRecord> parse_food_log(std::istream& in);
std::vector<WorkdayRecord> parse_work_log(std::istream& in);

ParticipantData assemble_participant(std::string participant_id, CgmTrace cgm,
                                     ActivityEventLog activity, std::vector<MealRecord> meals,
                                     std::vector<WorkdayRecord> workdays, double bmi);

void write_cgm(std::ostream& out, const CgmTrace& trace);
void write_activity_events(std::ostream& out, const ActivityEventLog& log);
void write_food_log(std::ostream& out, std::span<const MealRecord> meals);
void write_work_log(std::ostream& out, std::span<const WorkdayRecord> workdays);

// On-disk cohort layout:
//   participants.csv       participant,bmi
//   cgm/<id>.csv           per-participant CGM trace
//   activity/<id>.csv      per-participant activity events
//   food_log.csv           all participants
//   work_log.csv           all participants
std::vector<ParticipantData> read_cohort(const std::filesystem::path& dir);
// Writes into a sibling temporary directory and renames it into place.
void write_cohort(const std::filesystem::path& dir, std::span<const ParticipantData> cohort);

}  // namespace glucolens
