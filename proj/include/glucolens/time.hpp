#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace glucolens {

// Calendar date in local wall-clock terms. No timezone or DST arithmetic.
class Date {
 public:
  constexpr Date() = default;
  Date(int year, int month, int day);

  static Date from_days(std::int64_t days_since_epoch);
  // Accepts YYYY-MM-DD.
  static Date parse(std::string_view text);

  int year() const { return year_; }
  int month() const { return month_; }
  int day() const { return day_; }

  std::int64_t days_since_epoch() const;
  // 0 = Monday ... 6 = Sunday.
  int day_of_week() const;
  Date plus_days(std::int64_t n) const { return from_days(days_since_epoch() + n); }

  std::string to_string() const;

  auto operator<=>(const Date&) const = default;

 private:
  int year_ = 1970;
  int month_ = 1;
  int day_ = 1;
};

// Seconds since 1970-01-01 00:00:00 local time.
class DateTime {
 public:
  constexpr DateTime() = default;
  constexpr explicit DateTime(std::int64_t seconds) : seconds_(seconds) {}
  DateTime(Date date, int hour, int minute, int second = 0);

  static DateTime at_midnight(Date date) { return DateTime(date, 0, 0); }
  static DateTime at_minute_of_day(Date date, double minutes);
  // Accepts "YYYY-MM-DD HH:MM", "YYYY-MM-DD HH:MM:SS" and the ISO 'T' separator.
  static DateTime parse(std::string_view text);

  std::int64_t seconds() const { return seconds_; }
  Date date() const;
  std::int64_t seconds_of_day() const;
  double minute_of_day() const { return static_cast<double>(seconds_of_day()) / 60.0; }

  DateTime plus_seconds(std::int64_t s) const { return DateTime(seconds_ + s); }
  DateTime plus_minutes(double m) const;

  // Minutes from `other` to this instant.
  double minutes_since(DateTime other) const {
    return static_cast<double>(seconds_ - other.seconds_) / 60.0;
  }

  // Seconds are only printed when non-zero so minute-resolution data
  // round-trips in its original form.
  std::string to_string() const;

  auto operator<=>(const DateTime&) const = default;

 private:
  std::int64_t seconds_ = 0;
};

// "HH:MM" -> minutes since midnight.
int parse_clock_minutes(std::string_view text);
std::string format_clock_minutes(int minutes);

}  // namespace glucolens
