#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "glucolens/error.hpp"
#include "glucolens/ingest.hpp"

namespace testing_helpers {

using namespace glucolens;

inline Date day0() { return Date(2024, 3, 4); }  // a Monday

inline DateTime at(int hour, int minute, int day_offset = 0) {
  return DateTime(day0().plus_days(day_offset), hour, minute);
}

// Trace from (minutes after 00:00 of day0, glucose) pairs.
inline CgmTrace trace_from(const std::vector<std::pair<double, double>>& points,
                           const std::string& id = "P1") {
  std::vector<CgmSample> s;
  for (auto [m, g] : points) s.push_back({DateTime::at_minute_of_day(day0(), m), g});
  return CgmTrace(id, s);
}

inline std::istringstream stream(const std::string& text) { return std::istringstream(text); }

template <typename F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::logic_error("expected an Error");
}

template <typename F>
std::string message_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  throw std::logic_error("expected an Error");
}

}  // namespace testing_helpers
