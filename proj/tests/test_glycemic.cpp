#include <doctest.h>

#include <cmath>
#include <random>

#include "glucolens/glycemic.hpp"
#include "helpers.hpp"

using namespace glucolens;
using namespace testing_helpers;

namespace {

// Independent oracle: interpolate the raw samples directly and integrate with
// a midpoint sum on a 1-second grid.
double raw_interp(const CgmTrace& trace, double t_s) {
  const auto s = trace.samples();
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double a = static_cast<double>(s[i - 1].timestamp.seconds());
    const double b = static_cast<double>(s[i].timestamp.seconds());
    if (t_s >= a && t_s <= b) return s[i - 1].glucose + (t_s - a) / (b - a) * (s[i].glucose - s[i - 1].glucose);
  }
  throw std::logic_error("outside trace");
}

double riemann_oracle(const CgmTrace& trace, DateTime start, double minutes, double baseline,
                      bool clip) {
  const double t0 = static_cast<double>(start.seconds());
  const auto n = static_cast<long>(std::llround(minutes * 60.0));
  double sum = 0.0;
  for (long k = 0; k < n; ++k) {
    double v = raw_interp(trace, t0 + static_cast<double>(k) + 0.5) - baseline;
    if (clip) v = std::max(v, 0.0);
    sum += v;
  }
  return sum / 60.0;  // mg/dL·s -> mg/dL·min
}

// Postprandial-shaped random trace on a 15-minute grid starting at 06:00.
CgmTrace random_trace(std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 6.0);
  std::uniform_real_distribution<double> base(80.0, 110.0), height(20.0, 120.0), peak(30.0, 75.0);
  const double b = base(rng), h = height(rng), p = peak(rng);
  std::vector<std::pair<double, double>> pts;
  for (int k = 0; k <= 48; ++k) {
    const double m = 360.0 + 15.0 * k;
    const double since_meal = m - 420.0;  // meal at 07:00
    double g = b + noise(rng);
    if (since_meal > 0) g += h * (since_meal / p) * std::exp(1.0 - since_meal / p);
    pts.emplace_back(m, std::clamp(g, 40.0, 400.0));
  }
  return trace_from(pts);
}

}  // namespace

TEST_CASE("resample_window") {
  SUBCASE("samples exactly at the window endpoints") {
    const auto t = trace_from({{600, 100}, {660, 120}, {720, 115}, {780, 110}});
    const auto curve = resample_window(t, PostprandialWindow(at(10, 0), 180));
    CHECK(curve.t.front() == 0.0);
    CHECK(curve.t.back() == 180.0);
    CHECK(curve.g.front() == 100.0);
    CHECK(curve.g.back() == 110.0);
    CHECK(curve.t.size() == 4);
  }
  SUBCASE("one missing sample on a 15-minute grid is accepted") {
    std::vector<std::pair<double, double>> pts;
    for (int m = 600; m <= 800; m += 15) {
      if (m != 660) pts.emplace_back(m, 100);
    }
    CHECK_NOTHROW(resample_window(trace_from(pts), PostprandialWindow(at(10, 0))));
  }
  SUBCASE("a 90-minute gap inside the window") {
    const auto t = trace_from({{600, 100}, {615, 100}, {705, 100}, {800, 100}});
    CHECK(error_of([&] { resample_window(t, PostprandialWindow(at(10, 0))); }) ==
          ErrorCode::GapTooLarge);
  }
  SUBCASE("trace does not cover the window") {
    const auto t = trace_from({{610, 100}, {700, 100}});
    CHECK(error_of([&] { resample_window(t, PostprandialWindow(at(10, 0))); }) ==
          ErrorCode::InsufficientData);
  }
  SUBCASE("window duration bounds") {
    CHECK(error_of([] { PostprandialWindow(at(10, 0), 29); }) == ErrorCode::InvalidWindow);
    CHECK(error_of([] { PostprandialWindow(at(10, 0), 361); }) == ErrorCode::InvalidWindow);
  }
}

TEST_CASE("compute_auc") {
  SUBCASE("constant trace is an exact rectangle") {
    std::vector<std::pair<double, double>> pts;
    for (int m = 600; m <= 780; m += 15) pts.emplace_back(m, 100);
    CHECK(compute_auc(trace_from(pts), PostprandialWindow(at(10, 0), 180)) == 18000.0);
  }
  SUBCASE("linear ramp 100 -> 140 over 60 minutes") {
    // (100 + 140) / 2 * 60
    const auto t = trace_from({{600, 100}, {630, 120}, {660, 140}});
    CHECK(compute_auc(t, PostprandialWindow(at(10, 0), 60)) == doctest::Approx(7200.0).epsilon(1e-12));
  }
  SUBCASE("boundary values are interpolated") {
    // window 10:05-11:05 on a ramp of slope 1 mg/dL/min starting at 100 at 10:00
    const auto t = trace_from({{600, 100}, {630, 130}, {660, 160}, {690, 190}});
    // integral of 105 + u over [0, 60] = 105*60 + 1800
    CHECK(compute_auc(t, PostprandialWindow(DateTime(day0(), 10, 5), 60)) ==
          doctest::Approx(8100.0).epsilon(1e-12));
  }
}

TEST_CASE("compute_iauc") {
  SUBCASE("trace equal to the baseline") {
    const auto t = trace_from({{600, 100}, {660, 100}, {720, 100}});
    CHECK(compute_iauc(t, PostprandialWindow(at(10, 0), 120), 100.0) == 0.0);
  }
  SUBCASE("triangle 100 -> 140 -> 100 over 120 minutes") {
    // two trapezoids above baseline: 40 * 60 / 2 twice
    const auto t = trace_from({{600, 100}, {660, 140}, {720, 100}});
    CHECK(compute_iauc(t, PostprandialWindow(at(10, 0), 120), 100.0) == doctest::Approx(2400.0));
  }
  SUBCASE("trace entirely below baseline") {
    const auto t = trace_from({{600, 90}, {660, 80}, {720, 95}});
    CHECK(compute_iauc(t, PostprandialWindow(at(10, 0), 120), 100.0) == 0.0);
  }
  SUBCASE("crossing segments are clipped at the crossing point") {
    // 80 -> 120 over 60 min crosses 100 at 30 min: triangle 20 * 30 / 2
    const auto t = trace_from({{600, 80}, {660, 120}});
    CHECK(compute_iauc(t, PostprandialWindow(at(10, 0), 60), 100.0) == doctest::Approx(300.0));
  }
  SUBCASE("non-positive baseline") {
    const auto t = trace_from({{600, 100}, {720, 100}});
    CHECK(error_of([&] { compute_iauc(t, PostprandialWindow(at(10, 0), 120), 0.0); }) ==
          ErrorCode::NonPositiveBaseline);
  }
}

TEST_CASE("compute_max_bgl") {
  CHECK(compute_max_bgl(trace_from({{600, 120}, {700, 120}, {780, 120}}),
                        PostprandialWindow(at(10, 0))) == 120.0);
  CHECK(compute_max_bgl(trace_from({{600, 100}, {660, 140}, {720, 110}}),
                        PostprandialWindow(at(10, 0), 120)) == 140.0);
  SUBCASE("peak at the window end via interpolation") {
    // end at 13:00 = 780 min; straddling samples 765 -> 150 and 795 -> 210 give 180
    const auto t = trace_from({{600, 100}, {660, 130}, {765, 150}, {795, 210}});
    CHECK(compute_max_bgl(t, PostprandialWindow(at(10, 0), 180)) == doctest::Approx(180.0));
  }
  SUBCASE("no samples inside the window") {
    const auto t = trace_from({{500, 100}, {520, 100}});
    CHECK(error_of([&] { compute_max_bgl(t, PostprandialWindow(at(10, 0))); }) ==
          ErrorCode::InsufficientData);
  }
}

TEST_CASE("fasting_glucose uses the 06:00-10:00 minimum") {
  CHECK(fasting_glucose(trace_from({{300, 80}, {380, 100}, {420, 90}, {500, 95}, {700, 70}}),
                        day0()) == 90.0);
  CHECK(fasting_glucose(trace_from({{420, 105}}), day0()) == 105.0);
  CHECK(error_of([] { fasting_glucose(trace_from({{630, 100}, {700, 100}}), day0()); }) ==
        ErrorCode::NoMorningSamples);
}

TEST_CASE("recent_cgm averages midnight to 08:00") {
  CHECK(recent_cgm(trace_from({{60, 90}, {300, 110}, {600, 200}}), day0()) == 100.0);
  CHECK(recent_cgm(trace_from({{0, 95}, {240, 95}, {480, 95}}), day0()) == 95.0);
  CHECK(error_of([] { recent_cgm(trace_from({{500, 100}}), day0()); }) ==
        ErrorCode::NoOvernightSamples);
}

TEST_CASE("label_hyperglycemia") {
  GlycemicTargets t;
  t.max_bgl = 139.9;
  CHECK_FALSE(label_hyperglycemia(t, 140.0));
  t.max_bgl = 140.0;
  CHECK(label_hyperglycemia(t));
  t.max_bgl = 185.0;
  CHECK(label_hyperglycemia(t, 140.0));
}

TEST_CASE("compute_targets policies") {
  // peak 150 at 60 min, back to 120 by 120 min
  const auto t = trace_from({{585, 95}, {600, 100}, {660, 150}, {720, 120}, {780, 100}, {795, 100}});
  TargetConfig cfg;
  const auto a = compute_targets(t, at(10, 0), cfg);
  CHECK(a.hyperglycemic);
  CHECK(a.max_bgl == 150.0);
  CHECK(a.iauc <= a.auc);
  cfg.policy = HyperglycemiaPolicy::AtTwoHours;
  CHECK_FALSE(compute_targets(t, at(10, 0), cfg).hyperglycemic);
}

TEST_CASE("trapezoid matches a 1-second Riemann oracle on random traces") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const CgmTrace t = random_trace(rng);
    const DateTime meal = DateTime(day0(), 7, 0).plus_seconds(trial * 37);
    const PostprandialWindow w(meal, 180);
    const double auc = compute_auc(t, w);
    const double base = glucose_at(t, meal);
    const double iauc = compute_iauc(t, w, base);
    CHECK(std::abs(auc - riemann_oracle(t, meal, 180, 0.0, false)) / auc < 1e-6);
    CHECK(std::abs(iauc - riemann_oracle(t, meal, 180, base, true)) / iauc < 1e-6);
  }
}

TEST_CASE("properties of the glycemic targets") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const CgmTrace t = random_trace(rng);
    const PostprandialWindow w(at(7, 0), 180);
    const double auc = compute_auc(t, w);
    const auto curve = resample_window(t, w);

    // iAUC at baseline 0 is the AUC; non-increasing in the baseline.
    CHECK(area_above(curve, 0.0) == doctest::Approx(auc).epsilon(1e-12));
    double prev = auc;
    for (double b = 20; b <= 300; b += 20) {
      const double v = compute_iauc(t, w, b);
      CHECK(v <= prev + 1e-9);
      prev = v;
    }

    // Raising any sample never lowers the AUC.
    std::vector<CgmSample> raised(t.samples().begin(), t.samples().end());
    const std::size_t k = static_cast<std::size_t>(rng() % raised.size());
    raised[k].glucose = std::min(600.0, raised[k].glucose + 25.0);
    CHECK(compute_auc(CgmTrace("P1", raised), w) >= auc);

    // Shifting trace and window together.
    std::vector<CgmSample> shifted(t.samples().begin(), t.samples().end());
    for (auto& s : shifted) s.timestamp = s.timestamp.plus_seconds(86400 * 3 + 1234);
    const PostprandialWindow ws(w.start.plus_seconds(86400 * 3 + 1234), 180);
    const CgmTrace ts("P1", shifted);
    CHECK(compute_auc(ts, ws) == doctest::Approx(auc).epsilon(1e-12));
    CHECK(compute_max_bgl(ts, ws) == compute_max_bgl(t, w));

    // Scaling by c scales AUC, MaxBGL and (with the baseline) iAUC.
    const double c = 1.3;
    std::vector<CgmSample> scaled(t.samples().begin(), t.samples().end());
    for (auto& s : scaled) s.glucose *= c;
    const CgmTrace tc("P1", scaled);
    CHECK(compute_auc(tc, w) == doctest::Approx(c * auc).epsilon(1e-12));
    CHECK(compute_max_bgl(tc, w) == doctest::Approx(c * compute_max_bgl(t, w)).epsilon(1e-12));
    CHECK(compute_iauc(tc, w, c * 100.0) ==
          doctest::Approx(c * compute_iauc(t, w, 100.0)).epsilon(1e-12));
  }
}
