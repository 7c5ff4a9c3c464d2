#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "glucolens/ingest.hpp"
#include "glucolens/time.hpp"

namespace glucolens {

// Desk-scale stand-in for a workplace study: a baseline week, two weeks of a
// standing-desk condition, a week off and two weeks of a walking condition.
// Each lunch raises glucose by
//   carb_slope*net_carbs - fiber_slope*fiber - step_slope*work_step
//   + bmi_slope*(bmi - 32.8) + N(0, noise_sd)
// mg/dL at the peak, floored at min_excursion.
struct SynthCohortSpec {
  int n_participants = 10;
  int baseline_weeks = 1;
  int condition1_weeks = 2;
  int break_weeks = 1;
  int condition2_weeks = 2;
  double carb_slope = 1.4;     // mg/dL per g net carbs
  double fiber_slope = 3.0;    // mg/dL per g fiber
  double step_slope = 0.4;     // mg/dL per minute stepped between work start and lunch
  double bmi_slope = 0.8;      // mg/dL per BMI unit
  double noise_sd = 8.0;       // mg/dL, excursion height
  double cgm_noise_sd = 2.0;   // mg/dL, per sample
  double min_excursion = 5.0;
  double peak_minutes = 45.0;
  Date start = Date(2024, 1, 8);  // a Monday
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const SynthCohortSpec& spec);
// Missing keys keep their defaults; unknown keys raise InvalidConfig.
SynthCohortSpec synth_spec_from_json(const nlohmann::json& j);

std::vector<ParticipantData> synth_cohort(const SynthCohortSpec& spec);

}  // namespace glucolens
