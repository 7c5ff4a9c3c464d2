#include "glucolens/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "glucolens/error.hpp"
#include "glucolens/random.hpp"

namespace glucolens {

namespace {

constexpr double kMeanBmi = 32.8;
constexpr double kSdBmi = 4.5;

struct Segment {
  double from, to;  // minutes since midnight
  ActivityKind kind;
};

struct Mix {
  double sit, stand, step;
};

double round1(double v) { return std::round(v * 10.0) / 10.0; }

void fill(std::vector<Segment>& out, double from, double to, const Mix& mix, Rng& rng) {
  double t = from;
  while (t < to) {
    const double end = std::min(to, t + 5.0 + 20.0 * uniform01(rng));
    const double u = uniform01(rng);
    const ActivityKind kind = u < mix.sit ? ActivityKind::Sedentary
                              : u < mix.sit + mix.stand ? ActivityKind::Standing
                                                        : ActivityKind::Stepping;
    out.push_back({t, end, kind});
    t = end;
  }
}

double minutes_of(const std::vector<Segment>& segs, ActivityKind kind, double from, double to) {
  double total = 0.0;
  for (const auto& s : segs)
    if (s.kind == kind) total += std::max(0.0, std::min(s.to, to) - std::max(s.from, from));
  return total;
}

Mix work_mix(Phase phase) {
  switch (phase) {
    case Phase::Baseline: return {0.78, 0.12, 0.10};
    case Phase::Condition1: return {0.50, 0.38, 0.12};
    case Phase::Condition2: return {0.55, 0.15, 0.30};
  }
  return {0.78, 0.12, 0.10};
}

MacroProfile draw_macros(Rng& rng, double scale) {
  MacroProfile m;
  m.net_carbs = round1(scale * (15.0 + 75.0 * uniform01(rng)));
  m.fiber = round1(scale * 10.0 * uniform01(rng));
  m.total_carbs = round1(m.net_carbs + m.fiber);
  m.sugar = round1(m.net_carbs * (0.1 + 0.4 * uniform01(rng)));
  m.fat = round1(scale * (5.0 + 35.0 * uniform01(rng)));
  m.protein = round1(scale * (10.0 + 35.0 * uniform01(rng)));
  m.calories = round1(4.0 * m.total_carbs + 9.0 * m.fat + 4.0 * m.protein);
  m.calories_from_fat = round1(9.0 * m.fat);
  m.saturated_fat = round1(0.35 * m.fat);
  m.trans_fat = round1(0.02 * m.fat);
  m.cholesterol = round1(20.0 + 130.0 * uniform01(rng));
  m.sodium = round1(300.0 + 1200.0 * uniform01(rng));
  return m;
}

struct Excursion {
  double start_min;  // minutes since the week's first midnight
  double height;
};

ParticipantData make_participant(const SynthCohortSpec& spec, int index) {
  Rng rng = make_rng(spec.seed, {static_cast<std::uint64_t>(index)});
  const std::string id = fmt::format("P{:02d}", index + 1);
  const double bmi = std::clamp(kMeanBmi + kSdBmi * standard_normal(rng), 18.0, 50.0);
  const double base_level = 88.0 + 0.6 * (bmi - kMeanBmi) + 5.0 * standard_normal(rng);
  const double activity_level = std::exp(0.3 * standard_normal(rng));

  std::vector<std::pair<int, Phase>> weeks;
  int w = 0;
  for (int i = 0; i < spec.baseline_weeks; ++i) weeks.emplace_back(w++, Phase::Baseline);
  for (int i = 0; i < spec.condition1_weeks; ++i) weeks.emplace_back(w++, Phase::Condition1);
  w += spec.break_weeks;
  for (int i = 0; i < spec.condition2_weeks; ++i) weeks.emplace_back(w++, Phase::Condition2);

  std::vector<CgmSample> cgm;
  std::vector<ActivityEvent> events;
  std::vector<MealRecord> meals;
  std::vector<WorkdayRecord> workdays;

  for (const auto& [week, phase] : weeks) {
    const Date monday = spec.start.plus_days(7 * week);
    std::vector<Excursion> excursions;
    std::array<double, 7> day_base{};
    for (int d = 0; d < 7; ++d) {
      const Date date = monday.plus_days(d);
      const bool workday = d < 5;
      day_base[static_cast<std::size_t>(d)] = base_level + 3.0 * standard_normal(rng);
      const int work_start = 480 + 15 * static_cast<int>(uniform_index(rng, 7));
      const int work_end = work_start + 480 + 15 * static_cast<int>(uniform_index(rng, 4));
      const bool wfh = uniform01(rng) < 0.3;
      const double lunch = 690.0 + 5.0 * static_cast<double>(uniform_index(rng, 25));
      const double breakfast = 435.0 + 5.0 * static_cast<double>(uniform_index(rng, 6));
      const double dinner = 1110.0 + 5.0 * static_cast<double>(uniform_index(rng, 12));

      std::vector<Segment> segs;
      const Mix home{0.6, 0.25, 0.15};
      segs.push_back({0.0, 420.0, ActivityKind::PrimaryLying});
      if (workday) {
        Mix mix = work_mix(phase);
        const double factor = activity_level * (0.4 + 1.2 * uniform01(rng)) * (wfh ? 0.7 : 1.0);
        mix.step = std::min(0.6, mix.step * factor);
        mix.sit = 1.0 - mix.stand - mix.step;
        fill(segs, 420.0, work_start, home, rng);
        fill(segs, work_start, work_end, mix, rng);
        fill(segs, work_end, 1380.0, home, rng);
      } else {
        fill(segs, 420.0, 1380.0, home, rng);
      }
      segs.push_back({1380.0, 1440.0, ActivityKind::PrimaryLying});

      const DateTime midnight = DateTime::at_midnight(date);
      for (const auto& s : segs) {
        const auto from = std::llround(s.from * 60.0), to = std::llround(s.to * 60.0);
        events.push_back({midnight.plus_seconds(from), static_cast<double>(to - from), s.kind});
      }

      double work_step = 0.0;
      if (workday) {
        const double span = work_end - work_start;
        const double sit = std::floor(1000.0 * minutes_of(segs, ActivityKind::Sedentary, work_start, work_end) / span) / 10.0;
        const double stand = std::floor(1000.0 * minutes_of(segs, ActivityKind::Standing, work_start, work_end) / span) / 10.0;
        const double walk = std::floor(1000.0 * minutes_of(segs, ActivityKind::Stepping, work_start, work_end) / span) / 10.0;
        workdays.emplace_back(id, date, work_start, work_end, wfh, sit, stand, walk, phase);
        work_step = minutes_of(segs, ActivityKind::Stepping, work_start, lunch);
      }

      const double day_offset = 1440.0 * d;
      auto add_meal = [&](MealKind kind, double minute, double scale, double stepped) {
        MacroProfile m = draw_macros(rng, scale);
        meals.emplace_back(id, DateTime::at_minute_of_day(date, minute), kind, m, phase);
        const double height = spec.carb_slope * m.net_carbs - spec.fiber_slope * m.fiber -
                              spec.step_slope * stepped + spec.bmi_slope * (bmi - kMeanBmi) +
                              spec.noise_sd * standard_normal(rng);
        excursions.push_back({day_offset + minute, std::max(spec.min_excursion, height)});
      };
      add_meal(MealKind::Breakfast, breakfast, 0.5, 0.0);
      add_meal(MealKind::Lunch, lunch, 1.0, work_step);
      add_meal(MealKind::Dinner, dinner, 1.0, 0.0);
    }

    const DateTime week_start = DateTime::at_midnight(monday);
    for (int k = 0; k < 7 * 96; ++k) {
      const double t = 15.0 * k;
      const double minute_of_day = std::fmod(t, 1440.0);
      double g = day_base[static_cast<std::size_t>(k / 96)] +
                 4.0 * std::sin(2.0 * std::numbers::pi * minute_of_day / 1440.0);
      for (const auto& e : excursions) {
        const double dt = t - e.start_min;
        if (dt > 0.0 && dt < 480.0) g += e.height * (dt / spec.peak_minutes) * std::exp(1.0 - dt / spec.peak_minutes);
      }
      g += spec.cgm_noise_sd * standard_normal(rng);
      cgm.push_back({week_start.plus_seconds(900LL * k), std::clamp(g, 40.0, 400.0)});
    }
  }

  return assemble_participant(id, CgmTrace(id, std::move(cgm)), ActivityEventLog(id, std::move(events)),
                              std::move(meals), std::move(workdays), std::round(bmi * 10.0) / 10.0);
}

}  // namespace

void SynthCohortSpec::validate() const {
  if (n_participants < 1) fail(ErrorCode::InvalidConfig, "n_participants must be >= 1");
  if (baseline_weeks < 1 || condition1_weeks < 0 || break_weeks < 0 || condition2_weeks < 0)
    fail(ErrorCode::InvalidConfig, "phase lengths must be non-negative with at least one baseline week");
  for (double v : {carb_slope, fiber_slope, step_slope, bmi_slope, noise_sd, cgm_noise_sd, min_excursion})
    if (!std::isfinite(v)) fail(ErrorCode::InvalidConfig, "effect sizes must be finite");
  if (noise_sd < 0 || cgm_noise_sd < 0) fail(ErrorCode::InvalidConfig, "noise sd must be non-negative");
  if (!(peak_minutes > 0)) fail(ErrorCode::InvalidConfig, "peak_minutes must be positive");
  if (start.day_of_week() != 0) fail(ErrorCode::InvalidConfig, "cohort start must be a Monday");
}

nlohmann::json to_json(const SynthCohortSpec& s) {
  return {{"n_participants", s.n_participants}, {"baseline_weeks", s.baseline_weeks},
          {"condition1_weeks", s.condition1_weeks}, {"break_weeks", s.break_weeks},
          {"condition2_weeks", s.condition2_weeks}, {"carb_slope", s.carb_slope},
          {"fiber_slope", s.fiber_slope}, {"step_slope", s.step_slope},
          {"bmi_slope", s.bmi_slope}, {"noise_sd", s.noise_sd},
          {"cgm_noise_sd", s.cgm_noise_sd}, {"min_excursion", s.min_excursion},
          {"peak_minutes", s.peak_minutes}, {"start", s.start.to_string()},
          {"seed", s.seed}};
}

SynthCohortSpec synth_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::InvalidConfig, "synth spec must be an object");
  SynthCohortSpec s;
  const auto known = to_json(s);
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) fail(ErrorCode::InvalidConfig, fmt::format("unknown synth key '{}'", key));
  try {
    s.n_participants = j.value("n_participants", s.n_participants);
    s.baseline_weeks = j.value("baseline_weeks", s.baseline_weeks);
    s.condition1_weeks = j.value("condition1_weeks", s.condition1_weeks);
    s.break_weeks = j.value("break_weeks", s.break_weeks);
    s.condition2_weeks = j.value("condition2_weeks", s.condition2_weeks);
    s.carb_slope = j.value("carb_slope", s.carb_slope);
    s.fiber_slope = j.value("fiber_slope", s.fiber_slope);
    s.step_slope = j.value("step_slope", s.step_slope);
    s.bmi_slope = j.value("bmi_slope", s.bmi_slope);
    s.noise_sd = j.value("noise_sd", s.noise_sd);
    s.cgm_noise_sd = j.value("cgm_noise_sd", s.cgm_noise_sd);
    s.min_excursion = j.value("min_excursion", s.min_excursion);
    s.peak_minutes = j.value("peak_minutes", s.peak_minutes);
    if (j.contains("start")) s.start = Date::parse(j.at("start").get<std::string>());
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig, fmt::format("synth spec: {}", e.what()));
  }
  s.validate();
  return s;
}

std::vector<ParticipantData> synth_cohort(const SynthCohortSpec& spec) {
  spec.validate();
  std::vector<ParticipantData> out;
  out.reserve(static_cast<std::size_t>(spec.n_participants));
  for (int i = 0; i < spec.n_participants; ++i) out.push_back(make_participant(spec, i));
  return out;
}

}  // namespace glucolens
