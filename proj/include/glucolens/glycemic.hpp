#pragma once

#include <vector>

#include "glucolens/ingest.hpp"
#include "glucolens/time.hpp"

namespace glucolens {

inline constexpr double kDefaultWindowMinutes = 180.0;
inline constexpr double kDefaultMaxGapMinutes = 60.0;
inline constexpr double kHyperglycemiaThreshold = 140.0;

struct PostprandialWindow {
  PostprandialWindow(DateTime start, double duration_minutes = kDefaultWindowMinutes);

  DateTime start;
  double duration = kDefaultWindowMinutes;  // minutes, in [30, 360]

  DateTime end() const { return start.plus_minutes(duration); }
};

// Glucose as a piecewise-linear function of minutes since the window start.
// Knots cover [0, duration] exactly: the first and last are the interpolated
// boundary values, the rest are raw samples inside the window.
struct PiecewiseLinear {
  std::vector<double> t;  // minutes since window start, strictly increasing
  std::vector<double> g;  // mg/dL

  double operator()(double minutes) const;
};

struct GlycemicTargets {
  double auc = 0.0;      // mg/dL·min
  double iauc = 0.0;     // mg/dL·min
  double max_bgl = 0.0;  // mg/dL
  bool hyperglycemic = false;
};

enum class HyperglycemiaPolicy {
  MaxInWindow,  // MaxBGL over the whole window
  AtTwoHours,   // glucose interpolated at meal + 120 min
};

struct TargetConfig {
  double window_minutes = kDefaultWindowMinutes;
  double max_gap_minutes = kDefaultMaxGapMinutes;
  double threshold = kHyperglycemiaThreshold;
  HyperglycemiaPolicy policy = HyperglycemiaPolicy::MaxInWindow;
};

PiecewiseLinear resample_window(const CgmTrace& trace, const PostprandialWindow& window,
                                double max_gap_minutes = kDefaultMaxGapMinutes);

double compute_auc(const CgmTrace& trace, const PostprandialWindow& window,
                   double max_gap_minutes = kDefaultMaxGapMinutes);
double compute_iauc(const CgmTrace& trace, const PostprandialWindow& window, double baseline,
                    double max_gap_minutes = kDefaultMaxGapMinutes);
double compute_max_bgl(const CgmTrace& trace, const PostprandialWindow& window);

// Integrals over an already resampled curve.
double trapezoid_area(const PiecewiseLinear& curve);
double area_above(const PiecewiseLinear& curve, double baseline);

// Glucose linearly interpolated at `at` from the two straddling samples.
double glucose_at(const CgmTrace& trace, DateTime at,
                  double max_gap_minutes = kDefaultMaxGapMinutes);

double fasting_glucose(const CgmTrace& trace, Date date);
double recent_cgm(const CgmTrace& trace, Date date);

bool label_hyperglycemia(const GlycemicTargets& targets,
                         double threshold = kHyperglycemiaThreshold);

// All targets for a meal starting at `meal_time`. The iAUC baseline is the
// glucose interpolated at meal time.
GlycemicTargets compute_targets(const CgmTrace& trace, DateTime meal_time,
                                const TargetConfig& config = {});

}  // namespace glucolens
