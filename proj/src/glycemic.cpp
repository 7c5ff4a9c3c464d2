#include "glucolens/glycemic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "glucolens/error.hpp"

namespace glucolens {
namespace {

double minutes_between(const CgmSample& a, const CgmSample& b) {
  return b.timestamp.minutes_since(a.timestamp);
}

double lerp_at(const CgmSample& a, const CgmSample& b, DateTime at) {
  const double span = minutes_between(a, b);
  if (span <= 0.0) return a.glucose;
  const double f = at.minutes_since(a.timestamp) / span;
  return a.glucose + f * (b.glucose - a.glucose);
}

// Index of the last sample at or before `at`, or npos.
std::size_t last_at_or_before(std::span<const CgmSample> s, DateTime at) {
  auto it = std::upper_bound(s.begin(), s.end(), at,
                             [](DateTime t, const CgmSample& x) { return t < x.timestamp; });
  if (it == s.begin()) return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(std::distance(s.begin(), it) - 1);
}

// Index of the first sample at or after `at`, or npos.
std::size_t first_at_or_after(std::span<const CgmSample> s, DateTime at) {
  auto it = std::lower_bound(s.begin(), s.end(), at,
                             [](const CgmSample& x, DateTime t) { return x.timestamp < t; });
  if (it == s.end()) return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(std::distance(s.begin(), it));
}

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

}  // namespace

PostprandialWindow::PostprandialWindow(DateTime start_, double duration_minutes)
    : start(start_), duration(duration_minutes) {
  if (!(duration >= 30.0 && duration <= 360.0)) {
    fail(ErrorCode::InvalidWindow,
         fmt::format("window duration {} min outside [30, 360]", duration));
  }
}

double PiecewiseLinear::operator()(double minutes) const {
  if (t.empty()) return 0.0;
  if (minutes <= t.front()) return g.front();
  if (minutes >= t.back()) return g.back();
  auto it = std::upper_bound(t.begin(), t.end(), minutes);
  const auto i = static_cast<std::size_t>(std::distance(t.begin(), it)) - 1;
  const double f = (minutes - t[i]) / (t[i + 1] - t[i]);
  return g[i] + f * (g[i + 1] - g[i]);
}

PiecewiseLinear resample_window(const CgmTrace& trace, const PostprandialWindow& window,
                                double max_gap_minutes) {
  const auto s = trace.samples();
  const DateTime end = window.end();
  const std::size_t lo = last_at_or_before(s, window.start);
  const std::size_t hi = first_at_or_after(s, end);
  if (lo == npos || hi == npos) {
    fail(ErrorCode::InsufficientData,
         fmt::format("CGM does not cover the window {} .. {}", window.start.to_string(),
                     end.to_string()));
  }
  for (std::size_t i = lo; i < hi; ++i) {
    const double gap = minutes_between(s[i], s[i + 1]);
    if (gap > max_gap_minutes) {
      fail(ErrorCode::GapTooLarge,
           fmt::format("{} min gap after {} exceeds {} min", gap, s[i].timestamp.to_string(),
                       max_gap_minutes));
    }
  }

  PiecewiseLinear curve;
  curve.t.push_back(0.0);
  curve.g.push_back(s[lo].timestamp == window.start ? s[lo].glucose
                                                    : lerp_at(s[lo], s[lo + 1], window.start));
  for (std::size_t i = lo + 1; i < hi; ++i) {
    if (s[i].timestamp <= window.start || s[i].timestamp >= end) continue;
    curve.t.push_back(s[i].timestamp.minutes_since(window.start));
    curve.g.push_back(s[i].glucose);
  }
  curve.t.push_back(window.duration);
  curve.g.push_back(s[hi].timestamp == end ? s[hi].glucose : lerp_at(s[hi - 1], s[hi], end));
  return curve;
}

double trapezoid_area(const PiecewiseLinear& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.t.size(); ++i) {
    area += 0.5 * (curve.g[i - 1] + curve.g[i]) * (curve.t[i] - curve.t[i - 1]);
  }
  return area;
}

double area_above(const PiecewiseLinear& curve, double baseline) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.t.size(); ++i) {
    const double a = curve.g[i - 1] - baseline;
    const double b = curve.g[i] - baseline;
    const double dt = curve.t[i] - curve.t[i - 1];
    if (a >= 0.0 && b >= 0.0) {
      area += 0.5 * (a + b) * dt;
    } else if (a > 0.0) {
      area += 0.5 * a * (a / (a - b)) * dt;
    } else if (b > 0.0) {
      area += 0.5 * b * (b / (b - a)) * dt;
    }
  }
  return area;
}

double compute_auc(const CgmTrace& trace, const PostprandialWindow& window,
                   double max_gap_minutes) {
  return trapezoid_area(resample_window(trace, window, max_gap_minutes));
}

double compute_iauc(const CgmTrace& trace, const PostprandialWindow& window, double baseline,
                    double max_gap_minutes) {
  if (!(baseline > 0.0)) {
    fail(ErrorCode::NonPositiveBaseline, fmt::format("baseline {} must be positive", baseline));
  }
  return area_above(resample_window(trace, window, max_gap_minutes), baseline);
}

double compute_max_bgl(const CgmTrace& trace, const PostprandialWindow& window) {
  const auto s = trace.samples();
  const DateTime end = window.end();
  double best = -std::numeric_limits<double>::infinity();
  bool any_inside = false;
  for (const auto& x : s) {
    if (x.timestamp >= window.start && x.timestamp <= end) {
      best = std::max(best, x.glucose);
      any_inside = true;
    }
  }
  if (!any_inside) {
    fail(ErrorCode::InsufficientData,
         fmt::format("no CGM samples inside {} .. {}", window.start.to_string(), end.to_string()));
  }
  // Boundary values count when a straddling pair exists.
  for (DateTime edge : {window.start, end}) {
    const std::size_t lo = last_at_or_before(s, edge);
    const std::size_t hi = first_at_or_after(s, edge);
    if (lo != npos && hi != npos && lo != hi &&
        minutes_between(s[lo], s[hi]) <= kDefaultMaxGapMinutes) {
      best = std::max(best, lerp_at(s[lo], s[hi], edge));
    }
  }
  return best;
}

double glucose_at(const CgmTrace& trace, DateTime at, double max_gap_minutes) {
  const auto s = trace.samples();
  const std::size_t lo = last_at_or_before(s, at);
  const std::size_t hi = first_at_or_after(s, at);
  if (lo == npos || hi == npos) {
    fail(ErrorCode::InsufficientData, fmt::format("CGM does not cover {}", at.to_string()));
  }
  if (lo == hi) return s[lo].glucose;
  if (minutes_between(s[lo], s[hi]) > max_gap_minutes) {
    fail(ErrorCode::GapTooLarge, fmt::format("CGM gap around {}", at.to_string()));
  }
  return lerp_at(s[lo], s[hi], at);
}

double fasting_glucose(const CgmTrace& trace, Date date) {
  const DateTime from(date, 6, 0);
  const DateTime to(date, 10, 0);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : trace.samples()) {
    if (x.timestamp >= from && x.timestamp <= to) best = std::min(best, x.glucose);
  }
  if (!std::isfinite(best)) {
    fail(ErrorCode::NoMorningSamples,
         fmt::format("no CGM samples between 06:00 and 10:00 on {}", date.to_string()));
  }
  return best;
}

double recent_cgm(const CgmTrace& trace, Date date) {
  const DateTime from(date, 0, 0);
  const DateTime to(date, 8, 0);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& x : trace.samples()) {
    if (x.timestamp >= from && x.timestamp <= to) {
      sum += x.glucose;
      ++n;
    }
  }
  if (n == 0) {
    fail(ErrorCode::NoOvernightSamples,
         fmt::format("no CGM samples between 00:00 and 08:00 on {}", date.to_string()));
  }
  return sum / static_cast<double>(n);
}

bool label_hyperglycemia(const GlycemicTargets& targets, double threshold) {
  return targets.max_bgl >= threshold;
}

GlycemicTargets compute_targets(const CgmTrace& trace, DateTime meal_time,
                                const TargetConfig& config) {
  const PostprandialWindow window(meal_time, config.window_minutes);
  const PiecewiseLinear curve = resample_window(trace, window, config.max_gap_minutes);
  const double baseline = curve.g.front();

  GlycemicTargets t;
  t.auc = trapezoid_area(curve);
  t.iauc = area_above(curve, baseline);
  t.max_bgl = *std::max_element(curve.g.begin(), curve.g.end());
  if (config.policy == HyperglycemiaPolicy::MaxInWindow) {
    t.hyperglycemic = label_hyperglycemia(t, config.threshold);
  } else {
    t.hyperglycemic = glucose_at(trace, meal_time.plus_minutes(120.0), config.max_gap_minutes) >=
                      config.threshold;
  }
  return t;
}

}  // namespace glucolens
